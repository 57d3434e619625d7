use serde::{Deserialize, Serialize};

use super::CgnError;

/// Tuning knobs of the cluster method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CgnConfig {
    /// Number of cluster members `N`.
    pub cluster_size: usize,
    pub lambda_init: f64,
    /// Members whose λ exceeds this value are frozen.
    pub lambda_max: f64,
    /// Exponent of the inverse-distance weights; 0 gives uniform weights.
    pub gamma: f64,
    /// Iteration budget; the initial cluster counts as iteration 1.
    pub k_max: usize,
    pub seed: u64,
    /// Sampling attempts per member before initialization gives up.
    pub max_resample: usize,
    pub workers: usize,
    /// Upper clamp for a single weight (coincident points).
    pub weight_cap: f64,
    /// Relative singular-value cutoff for the pseudoinverse; `None` uses
    /// `max(rows, cols) · ε`.
    pub rank_tol: Option<f64>,
}

impl Default for CgnConfig {
    fn default() -> Self {
        Self {
            cluster_size: 250,
            lambda_init: 0.01,
            lambda_max: 1e10,
            gamma: 1.0,
            k_max: 100,
            seed: 0,
            max_resample: 100,
            workers: 1,
            weight_cap: 1e12,
            rank_tol: None,
        }
    }
}

impl CgnConfig {
    /// Checks the invariants; `dim_x` is only used for the rank warning.
    pub fn validate(&self, dim_x: usize) -> Result<(), CgnError> {
        let bad = |msg: String| Err(CgnError::InvalidConfig(msg));
        if self.cluster_size == 0 {
            return bad("cluster_size must be at least 1".into());
        }
        if !(self.lambda_init > 0.0 && self.lambda_init.is_finite()) {
            return bad(format!("lambda_init must be > 0, got {}", self.lambda_init));
        }
        if !(self.lambda_max > self.lambda_init) {
            return bad(format!(
                "lambda_max ({}) must exceed lambda_init ({})",
                self.lambda_max, self.lambda_init
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if self.max_resample == 0 {
            return bad("max_resample must be at least 1".into());
        }
        if !(self.weight_cap > 0.0) {
            return bad(format!("weight_cap must be > 0, got {}", self.weight_cap));
        }
        if let Some(tol) = self.rank_tol {
            if !(tol >= 0.0) {
                return bad(format!("rank_tol must be >= 0, got {tol}"));
            }
        }
        if self.cluster_size < dim_x + 1 {
            log::warn!(
                "cluster of {} points in {} dimensions: linear approximations will be rank deficient",
                self.cluster_size,
                dim_x
            );
        }
        Ok(())
    }
}
