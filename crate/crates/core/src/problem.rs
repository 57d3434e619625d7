//! Residual models and least-squares problems.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Vector;

/// A deterministic map `x ∈ Rⁿ → y ∈ Rᵐ`. Returning `None` means the model
/// could not be evaluated at `x` (solver breakdown, undefined output).
///
/// Implementations must be safe to call from several threads at once.
pub trait Model: Send + Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Option<Vec<f64>>;
}

/// Adapter turning a closure into a [`Model`].
pub struct FnModel<F> {
    dim_x: usize,
    dim_y: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync,
{
    pub fn new(dim_x: usize, dim_y: usize, f: F) -> Self {
        Self { dim_x, dim_y, f }
    }
}

impl<F> Model for FnModel<F>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync,
{
    fn dim_x(&self) -> usize {
        self.dim_x
    }
    fn dim_y(&self) -> usize {
        self.dim_y
    }
    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        (self.f)(x)
    }
}

/// Space in which residuals are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ResidualScale {
    Linear,
    #[default]
    Log10,
}

impl ResidualScale {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            ResidualScale::Linear => v,
            ResidualScale::Log10 => {
                if v > 0.0 {
                    v.log10()
                } else {
                    f64::NAN
                }
            }
        }
    }
}

impl fmt::Display for ResidualScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualScale::Linear => "linear",
            ResidualScale::Log10 => "log10",
        })
    }
}

impl FromStr for ResidualScale {
    type Err = ProblemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(ResidualScale::Linear),
            "log10" | "log" => Ok(ResidualScale::Log10),
            other => Err(ProblemError::UnknownScale(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("range_lo[{0}] > range_hi[{0}]")]
    InvertedRange(usize),
    #[error("observation {0} is not representable in {1} scale")]
    BadObservation(usize, ResidualScale),
    #[error("unknown residual scale {0:?}")]
    UnknownScale(String),
}

/// A nonlinear least-squares problem `min ‖T(f(x)) − T(y*)‖²` together with
/// the box `[x_lo, x_hi]` from which starting points are drawn. `T` is the
/// residual scale transform applied componentwise.
#[derive(Clone)]
pub struct Problem {
    model: Arc<dyn Model>,
    observed: Vec<f64>,
    scale: ResidualScale,
    target: Vector,
    range_lo: Vec<f64>,
    range_hi: Vec<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("dim_x", &self.dim_x())
            .field("dim_y", &self.dim_y())
            .field("scale", &self.scale)
            .field("range_lo", &self.range_lo)
            .field("range_hi", &self.range_hi)
            .finish()
    }
}

impl Problem {
    /// Linear-scale problem.
    pub fn new(
        model: Arc<dyn Model>,
        observed: Vec<f64>,
        range_lo: Vec<f64>,
        range_hi: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        Self::with_scale(model, observed, range_lo, range_hi, ResidualScale::Linear)
    }

    pub fn with_scale(
        model: Arc<dyn Model>,
        observed: Vec<f64>,
        range_lo: Vec<f64>,
        range_hi: Vec<f64>,
        scale: ResidualScale,
    ) -> Result<Self, ProblemError> {
        let n = model.dim_x();
        let m = model.dim_y();
        if observed.len() != m {
            return Err(ProblemError::Dimension(format!(
                "model has {m} outputs but {} observations were given",
                observed.len()
            )));
        }
        if range_lo.len() != n || range_hi.len() != n {
            return Err(ProblemError::Dimension(format!(
                "model has {n} parameters but the range has {}/{} bounds",
                range_lo.len(),
                range_hi.len()
            )));
        }
        if let Some(j) = (0..n).find(|&j| !(range_lo[j] <= range_hi[j])) {
            return Err(ProblemError::InvertedRange(j));
        }
        let target = Vector::from_iterator(m, observed.iter().map(|&v| scale.apply(v)));
        if let Some(k) = target.iter().position(|v| !v.is_finite()) {
            return Err(ProblemError::BadObservation(k, scale));
        }
        Ok(Self {
            model,
            observed,
            scale,
            target,
            range_lo,
            range_hi,
        })
    }

    /// Same problem with the model replaced; observations, scale and range
    /// are kept.
    pub fn map_model(&self, model: Arc<dyn Model>) -> Result<Self, ProblemError> {
        Self::with_scale(
            model,
            self.observed.clone(),
            self.range_lo.clone(),
            self.range_hi.clone(),
            self.scale,
        )
    }

    pub fn with_range(mut self, range_lo: Vec<f64>, range_hi: Vec<f64>) -> Result<Self, ProblemError> {
        let n = self.dim_x();
        if range_lo.len() != n || range_hi.len() != n {
            return Err(ProblemError::Dimension("range length".into()));
        }
        if let Some(j) = (0..n).find(|&j| !(range_lo[j] <= range_hi[j])) {
            return Err(ProblemError::InvertedRange(j));
        }
        self.range_lo = range_lo;
        self.range_hi = range_hi;
        Ok(self)
    }

    pub fn dim_x(&self) -> usize {
        self.model.dim_x()
    }

    pub fn dim_y(&self) -> usize {
        self.model.dim_y()
    }

    pub fn model(&self) -> &Arc<dyn Model> {
        &self.model
    }

    /// Observations in model units (before the scale transform).
    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn scale(&self) -> ResidualScale {
        self.scale
    }

    /// Observations in residual space.
    pub fn target(&self) -> &Vector {
        &self.target
    }

    pub fn range_lo(&self) -> &[f64] {
        &self.range_lo
    }

    pub fn range_hi(&self) -> &[f64] {
        &self.range_hi
    }

    /// Model output in residual space, or `None` when the model fails or any
    /// transformed component is non-finite.
    pub fn evaluate(&self, x: &[f64]) -> Option<Vector> {
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let raw = self.model.eval(x)?;
        if raw.len() != self.dim_y() {
            return None;
        }
        let y = Vector::from_iterator(raw.len(), raw.into_iter().map(|v| self.scale.apply(v)));
        y.iter().all(|v| v.is_finite()).then_some(y)
    }

    /// Sum of squared residuals of a residual-space output.
    pub fn ssr(&self, y: &Vector) -> f64 {
        (y - &self.target).norm_squared()
    }

    /// SSR at `x`, `None` if not evaluable.
    pub fn ssr_at(&self, x: &[f64]) -> Option<f64> {
        self.evaluate(x).map(|y| self.ssr(&y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Arc<dyn Model> {
        Arc::new(FnModel::new(1, 1, |x: &[f64]| Some(vec![x[0] * x[0]])))
    }

    #[test]
    fn log_scale_rejects_nonpositive_output() {
        let p = Problem::with_scale(square(), vec![4.0], vec![-1.0], vec![1.0], ResidualScale::Log10)
            .unwrap();
        assert!(p.evaluate(&[0.0]).is_none());
        let y = p.evaluate(&[2.0]).unwrap();
        assert_eq!(p.ssr(&y), 0.0);
    }

    #[test]
    fn nan_output_is_not_evaluable() {
        let m: Arc<dyn Model> = Arc::new(FnModel::new(1, 1, |_: &[f64]| Some(vec![f64::NAN])));
        let p = Problem::new(m, vec![0.0], vec![0.0], vec![1.0]).unwrap();
        assert!(p.evaluate(&[0.5]).is_none());
    }

    #[test]
    fn inverted_range_is_rejected() {
        let err = Problem::new(square(), vec![0.0], vec![1.0], vec![0.0]).unwrap_err();
        assert_eq!(err, ProblemError::InvertedRange(0));
    }

    #[test]
    fn log_scale_observation_must_be_positive() {
        let err = Problem::with_scale(square(), vec![0.0], vec![0.0], vec![1.0], ResidualScale::Log10)
            .unwrap_err();
        assert!(matches!(err, ProblemError::BadObservation(0, _)));
    }

    #[test]
    fn scale_parses() {
        assert_eq!("linear".parse::<ResidualScale>().unwrap(), ResidualScale::Linear);
        assert_eq!("log10".parse::<ResidualScale>().unwrap(), ResidualScale::Log10);
        assert!("ln".parse::<ResidualScale>().is_err());
    }
}
