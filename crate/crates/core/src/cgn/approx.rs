//! Weighted global linear approximation and the damped Gauss-Newton step.

use super::{CgnConfig, CgnError, ClusterState};
use crate::linalg::{self, Matrix, Vector};

/// Slope of the linear approximation `f(x) ≈ A (x − x_i) + y_i` around one
/// anchor member.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// m×n slope.
    pub a: Matrix,
    pub anchor_index: usize,
    pub anchor_x: Vector,
    pub anchor_y: Vector,
}

/// Inverse-distance weights of all members relative to `anchor`.
///
/// Distances are measured after normalizing each coordinate by the width of
/// the initial box; `d_j = dist_j^(−2γ)`, `d_anchor = 0`, and every weight is
/// clamped to `weight_cap` so coincident points stay finite.
pub fn compute_weights(
    x: &Matrix,
    anchor: usize,
    range_lo: &[f64],
    range_hi: &[f64],
    gamma: f64,
    weight_cap: f64,
) -> Vec<f64> {
    let (n, cols) = x.shape();
    // Zero-width coordinates are left unnormalized.
    let widths: Vec<f64> = (0..n)
        .map(|l| {
            let w = range_hi[l] - range_lo[l];
            if w > 0.0 { w } else { 1.0 }
        })
        .collect();
    (0..cols)
        .map(|j| {
            if j == anchor {
                return 0.0;
            }
            if gamma == 0.0 {
                return 1.0;
            }
            let dist2: f64 = (0..n)
                .map(|l| {
                    let t = (x[(l, j)] - x[(l, anchor)]) / widths[l];
                    t * t
                })
                .sum();
            let d = dist2.powf(-gamma);
            if d.is_nan() { weight_cap } else { d.min(weight_cap) }
        })
        .collect()
}

/// Fits `A_(i)` from the current cluster; uses no model evaluations.
pub fn construct_linear_approximation(
    state: &ClusterState,
    anchor: usize,
    range_lo: &[f64],
    range_hi: &[f64],
    config: &CgnConfig,
) -> Result<LinearModel, CgnError> {
    let weights = compute_weights(
        &state.x,
        anchor,
        range_lo,
        range_hi,
        config.gamma,
        config.weight_cap,
    );
    if weights.iter().all(|&w| w == 0.0) {
        return Err(CgnError::DegenerateCluster(anchor));
    }
    let anchor_x = state.member_x(anchor);
    let anchor_y = state.member_y(anchor);
    let mut dx = state.x.clone();
    let mut dy = state.y.clone();
    for mut col in dx.column_iter_mut() {
        col -= &anchor_x;
    }
    for mut col in dy.column_iter_mut() {
        col -= &anchor_y;
    }
    let a = linalg::weighted_minnorm_ls(&dx, &dy, &weights, config.rank_tol)?;
    Ok(LinearModel {
        a,
        anchor_index: anchor,
        anchor_x,
        anchor_y,
    })
}

/// `x_i + (AᵀA + λ_i I)⁻¹ Aᵀ (y* − y_i)`; the result is not clipped to the box.
pub fn propose_step(model: &LinearModel, lambda: f64, target: &Vector) -> Result<Vector, CgnError> {
    let residual = target - &model.anchor_y;
    let delta = linalg::regularized_solve(&model.a, &residual, lambda)?;
    Ok(&model.anchor_x + delta)
}
