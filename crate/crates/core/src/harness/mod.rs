//! Experiment runner shared by the CLI and the examples: builds a problem,
//! draws one start matrix, runs CGN or multi-start LM from it and writes CSV
//! and JSON artifacts.

pub mod artifacts;
pub mod curves;
pub mod experiment;
pub mod spec;

use std::io;

use thiserror::Error;

use crate::cgn::CgnError;
use crate::problems::{DatasetError, SuiteError};

pub use artifacts::{Summary, start_hash};
pub use curves::{EvalCurve, ThresholdCurve, cgn_eval_curve, lm_eval_curve, threshold_curve, threshold_grid};
pub use experiment::{RunOutcome, SweepAxis, compare, make_data, prepare, run_experiment, sweep};
pub use spec::{ExperimentSpec, Solver};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 for failures while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Runtime(_) | HarnessError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}

impl From<CgnError> for HarnessError {
    fn from(e: CgnError) -> Self {
        match e {
            CgnError::InvalidConfig(msg) => HarnessError::Config(msg),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<SuiteError> for HarnessError {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Dataset(DatasetError::Io(source)) => HarnessError::Io { path: "dataset".into(), source },
            SuiteError::Dataset(d) => HarnessError::Runtime(d.to_string()),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<DatasetError> for HarnessError {
    fn from(e: DatasetError) -> Self {
        SuiteError::Dataset(e).into()
    }
}
