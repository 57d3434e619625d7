//! Benchmark problems addressable by id, each with a generating parameter
//! vector, a default starting box and a synthetic dataset.

pub mod dataset;
pub mod pbpk;
pub mod pk;
pub mod rounded;
pub mod toy;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{Model, Problem, ProblemError, ResidualScale};
pub use dataset::{Dataset, DatasetError, ObservationLabel, make_dataset};
use pbpk::{PBPK_TRUTH, PbpkModel};
use pk::{FlipFlopModel, IvAmountModel};
use rounded::RoundedModel;
use toy::{TOY_TARGET, ToyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemId {
    #[serde(rename = "toy1d")]
    Toy1d,
    #[serde(rename = "flipflop")]
    FlipFlop,
    #[serde(rename = "iv_amount")]
    IvAmount,
    #[serde(rename = "pbpk_ex1")]
    PbpkEx1,
    #[serde(rename = "pbpk_ex1_rounded")]
    PbpkEx1Rounded,
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown problem id {0:?}")]
    UnknownId(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("dataset was generated for {found:?}, expected {expected:?}")]
    Mismatch { expected: String, found: String },
}

impl ProblemId {
    pub const ALL: [ProblemId; 5] = [
        ProblemId::Toy1d,
        ProblemId::FlipFlop,
        ProblemId::IvAmount,
        ProblemId::PbpkEx1,
        ProblemId::PbpkEx1Rounded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Toy1d => "toy1d",
            ProblemId::FlipFlop => "flipflop",
            ProblemId::IvAmount => "iv_amount",
            ProblemId::PbpkEx1 => "pbpk_ex1",
            ProblemId::PbpkEx1Rounded => "pbpk_ex1_rounded",
        }
    }

    /// Unrounded model used to generate observations.
    pub fn base_model(self) -> Arc<dyn Model> {
        match self {
            ProblemId::Toy1d => Arc::new(ToyModel),
            ProblemId::FlipFlop => Arc::new(FlipFlopModel::default()),
            ProblemId::IvAmount => Arc::new(IvAmountModel::default()),
            ProblemId::PbpkEx1 | ProblemId::PbpkEx1Rounded => Arc::new(PbpkModel::default()),
        }
    }

    /// Model that is fitted.
    pub fn model(self) -> Arc<dyn Model> {
        match self {
            ProblemId::PbpkEx1Rounded => Arc::new(RoundedModel::new(self.base_model())),
            _ => self.base_model(),
        }
    }

    pub fn truth_x(self) -> Vec<f64> {
        match self {
            ProblemId::Toy1d => vec![0.0],
            ProblemId::FlipFlop => vec![0.0, 0.0, 1.0],
            ProblemId::IvAmount => vec![0.0, 0.3],
            ProblemId::PbpkEx1 | ProblemId::PbpkEx1Rounded => PBPK_TRUTH.to_vec(),
        }
    }

    /// Box from which starting points are drawn.
    pub fn default_range(self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ProblemId::Toy1d => (vec![-8.0], vec![8.0]),
            // Contains both the generating triple and its swapped twin.
            ProblemId::FlipFlop => (vec![-1.0, -2.0, -1.0], vec![1.0, 1.0, 2.0]),
            ProblemId::IvAmount => (vec![-2.0, -2.0], vec![2.0, 2.0]),
            ProblemId::PbpkEx1 | ProblemId::PbpkEx1Rounded => (
                PBPK_TRUTH.iter().map(|v| v - 2.0).collect(),
                PBPK_TRUTH.iter().map(|v| v + 2.0).collect(),
            ),
        }
    }

    /// Fixed starting points, if the problem has any (one per entry).
    pub fn pinned_starts(self) -> Option<Vec<Vec<f64>>> {
        match self {
            ProblemId::Toy1d => Some(toy::TOY_STARTS.iter().map(|&x| vec![x]).collect()),
            _ => None,
        }
    }

    pub fn default_scale(self) -> ResidualScale {
        match self {
            ProblemId::Toy1d => ResidualScale::Linear,
            _ => ResidualScale::Log10,
        }
    }

    /// Relative noise of the default dataset.
    pub fn default_noise(self) -> f64 {
        match self {
            ProblemId::Toy1d | ProblemId::FlipFlop => 0.0,
            _ => 0.10,
        }
    }

    pub fn labels(self) -> Vec<ObservationLabel> {
        let single = |times: &[f64]| {
            times
                .iter()
                .map(|&time| ObservationLabel { time, dose_level: "single".into() })
                .collect()
        };
        match self {
            ProblemId::Toy1d => single(&[0.0]),
            ProblemId::FlipFlop => single(&pk::FLIPFLOP_TIMES),
            ProblemId::IvAmount => single(&pk::IV_TIMES),
            ProblemId::PbpkEx1 | ProblemId::PbpkEx1Rounded => PbpkModel::default()
                .observation_labels()
                .into_iter()
                .map(|(time, dose)| ObservationLabel { time, dose_level: dose.name().into() })
                .collect(),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| SuiteError::UnknownId(s.to_string()))
    }
}

/// Options for synthesizing a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataOptions {
    pub seed: u64,
    pub noise_sd_frac: f64,
    pub residual_scale: ResidualScale,
}

impl DataOptions {
    pub fn defaults_for(id: ProblemId, seed: u64) -> Self {
        Self {
            seed,
            noise_sd_frac: id.default_noise(),
            residual_scale: id.default_scale(),
        }
    }
}

/// A problem ready to solve together with the data it was built from.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub id: ProblemId,
    pub problem: Problem,
    pub dataset: Dataset,
}

impl ProblemInstance {
    pub fn truth_ssr(&self) -> f64 {
        self.dataset.truth_ssr
    }
}

/// Generates the dataset for `id`. For the toy function the observation is
/// the target value itself.
pub fn generate_dataset(id: ProblemId, opts: &DataOptions) -> Result<Dataset, SuiteError> {
    let truth = id.truth_x();
    let mut data = make_dataset(
        id.as_str(),
        id.base_model().as_ref(),
        &truth,
        id.labels(),
        opts.noise_sd_frac,
        opts.seed,
        opts.residual_scale,
    )?;
    if id == ProblemId::Toy1d {
        debug_assert_eq!(data.y_star, vec![TOY_TARGET]);
    }
    if id == ProblemId::PbpkEx1Rounded {
        // Same observations as the smooth problem; the reference SSR is that
        // of the rounded model at the generating parameters.
        let fitted = id.model();
        let y = fitted.eval(&truth).ok_or(DatasetError::TruthNotEvaluable)?;
        let s = opts.residual_scale;
        data.truth_ssr = y
            .iter()
            .zip(&data.y_star)
            .map(|(&a, &b)| (s.apply(a) - s.apply(b)).powi(2))
            .sum();
        if !data.truth_ssr.is_finite() {
            return Err(DatasetError::TruthNotEvaluable.into());
        }
    }
    Ok(data)
}

/// Problem for `id` over the given dataset with the default box.
pub fn instance_from_dataset(id: ProblemId, dataset: Dataset) -> Result<ProblemInstance, SuiteError> {
    if dataset.problem != id.as_str() {
        return Err(SuiteError::Mismatch {
            expected: id.as_str().into(),
            found: dataset.problem.clone(),
        });
    }
    let (lo, hi) = id.default_range();
    let problem = Problem::with_scale(id.model(), dataset.y_star.clone(), lo, hi, dataset.residual_scale)?;
    Ok(ProblemInstance { id, problem, dataset })
}

pub fn build(id: ProblemId, opts: &DataOptions) -> Result<ProblemInstance, SuiteError> {
    instance_from_dataset(id, generate_dataset(id, opts)?)
}
