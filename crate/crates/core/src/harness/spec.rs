use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::baseline::LmConfig;
use crate::cgn::CgnConfig;
use crate::problem::ResidualScale;
use crate::problems::{DataOptions, ProblemId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Cgn,
    /// Multi-start LM, forward-difference step 1e-6.
    Lm,
    /// Multi-start LM, forward-difference step 1e-3.
    LmDef,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Cgn => "cgn",
            Solver::Lm => "lm",
            Solver::LmDef => "lm_def",
        }
    }

    pub fn default_fd_step(self) -> f64 {
        match self {
            Solver::LmDef => 1e-3,
            _ => 1e-6,
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Solver {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cgn" => Ok(Solver::Cgn),
            "lm" => Ok(Solver::Lm),
            "lm_def" | "lm-def" => Ok(Solver::LmDef),
            _ => Err(HarnessError::Config(format!("unknown solver {s:?}"))),
        }
    }
}

/// Everything needed to reproduce one run. Unset optional fields fall back
/// to per-problem or per-solver defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: ProblemId,
    pub solver: Solver,
    pub n: usize,
    pub gamma: f64,
    pub lambda_init: f64,
    pub lambda_max: f64,
    pub k_max: usize,
    pub fd_step: Option<f64>,
    pub lm_max_evals: Option<u64>,
    pub seed: u64,
    pub residual_scale: Option<ResidualScale>,
    pub noise: Option<f64>,
    pub workers: usize,
    pub out: PathBuf,
    /// Directory holding `dataset.csv`/`dataset.json`; synthesized from
    /// `seed` when absent.
    pub data: Option<PathBuf>,
    /// Start from the problem's fixed points instead of a random cluster;
    /// `n` is then the number of fixed points.
    pub pinned_starts: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let cgn = CgnConfig::default();
        Self {
            problem: ProblemId::PbpkEx1,
            solver: Solver::Cgn,
            n: cgn.cluster_size,
            gamma: cgn.gamma,
            lambda_init: cgn.lambda_init,
            lambda_max: cgn.lambda_max,
            k_max: cgn.k_max,
            fd_step: None,
            lm_max_evals: None,
            seed: 0,
            residual_scale: None,
            noise: None,
            workers: 1,
            out: PathBuf::from("out"),
            data: None,
            pinned_starts: false,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes") + "\n"
    }

    pub fn cgn_config(&self) -> CgnConfig {
        CgnConfig {
            cluster_size: self.n,
            lambda_init: self.lambda_init,
            lambda_max: self.lambda_max,
            gamma: self.gamma,
            k_max: self.k_max,
            seed: self.seed,
            workers: self.workers,
            ..CgnConfig::default()
        }
    }

    pub fn lm_config(&self) -> LmConfig {
        LmConfig {
            lambda_init: self.lambda_init,
            lambda_max: self.lambda_max,
            fd_step: self.fd_step.unwrap_or(self.solver.default_fd_step()),
            max_evals: self.lm_max_evals,
            workers: self.workers,
            ..LmConfig::default()
        }
    }

    pub fn data_options(&self) -> DataOptions {
        let d = DataOptions::defaults_for(self.problem, self.seed);
        DataOptions {
            seed: self.seed,
            noise_sd_frac: self.noise.unwrap_or(d.noise_sd_frac),
            residual_scale: self.residual_scale.unwrap_or(d.residual_scale),
        }
    }

    /// Checks everything that can be checked without evaluating the model.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let dim_x = self.problem.truth_x().len();
        self.cgn_config()
            .validate(dim_x)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.solver != Solver::Cgn {
            self.lm_config().validate().map_err(HarnessError::Config)?;
        }
        if self.pinned_starts && self.problem.pinned_starts().is_none() {
            return Err(HarnessError::Config(format!("{} has no pinned starts", self.problem)));
        }
        if self.n == 0 {
            return Err(HarnessError::Config("n must be at least 1".into()));
        }
        if let Some(noise) = self.noise {
            if !(noise.is_finite() && noise >= 0.0) {
                return Err(HarnessError::Config(format!("noise must be non-negative, got {noise}")));
            }
        }
        Ok(())
    }
}
