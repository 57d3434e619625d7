//! Piecewise-constant variant of a model: every output rounded to one
//! decimal place.

use std::sync::Arc;

use crate::problem::{Model, Problem};

pub struct RoundedModel {
    inner: Arc<dyn Model>,
}

impl RoundedModel {
    pub fn new(inner: Arc<dyn Model>) -> Self {
        Self { inner }
    }
}

/// Round half away from zero to one decimal.
pub fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

impl Model for RoundedModel {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }

    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }

    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.eval(x).map(|y| y.into_iter().map(round1).collect())
    }
}

/// `problem` with its model outputs rounded before the residual transform.
pub fn rounded(problem: &Problem) -> Problem {
    let model: Arc<dyn Model> = Arc::new(RoundedModel::new(problem.model().clone()));
    problem
        .map_model(model)
        .expect("rounding keeps dimensions and observations")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnModel;

    #[test]
    fn rounding_rule() {
        assert_eq!(round1(1.26), 1.3);
        assert_eq!(round1(1.24), 1.2);
        assert_eq!(round1(-0.26), -0.3);
    }

    #[test]
    fn plateau_and_failure_preserved() {
        let inner: Arc<dyn Model> = Arc::new(FnModel::new(1, 1, |x: &[f64]| (x[0] >= 0.0).then(|| vec![x[0]])));
        let p = Problem::new(inner, vec![0.5], vec![-1.0], vec![1.0]).unwrap();
        let r = rounded(&p);
        assert_eq!(r.evaluate(&[0.41]), r.evaluate(&[0.449]));
        assert!(r.evaluate(&[-0.1]).is_none());
    }
}
