//! Dense linear algebra used by the cluster step: SVD, pseudoinverse,
//! weighted minimum-norm least squares and Tikhonov-damped solves.
//!
//! Everything here is a pure function on `f64` matrices. Sizes in this crate
//! are small (a few hundred columns at most), so dense routines are used
//! throughout.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Sweep budget for the Jacobi SVD; convergence normally takes under 10.
const SVD_MAX_SWEEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("SVD did not converge within {0} sweeps")]
    SvdNoConvergence(usize),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("rank tolerance must be non-negative, got {0}")]
    NegativeRankTol(f64),
}

/// Thin singular value decomposition `M = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    /// Non-increasing, non-negative.
    pub s: Vector,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        &self.u * Matrix::from_diagonal(&self.s) * self.v.transpose()
    }

    pub fn max_singular_value(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Wide matrices are decomposed through their transpose. Columns of `u`
/// belonging to zero singular values are completed to an orthonormal set.
pub fn svd(m: &Matrix) -> Result<Svd, LinalgError> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite("svd input"));
    }
    let (rows, cols) = m.shape();
    if rows.min(cols) == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            s: Vector::zeros(0),
            v: Matrix::zeros(cols, 0),
        });
    }
    if rows < cols {
        let t = svd(&m.transpose())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    let (w, v) = jacobi_sweeps(m.clone())?;
    let norms: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let s_max = norms[order[0]];
    let null_tol = s_max * rows as f64 * f64::EPSILON;
    let mut u = Matrix::zeros(rows, cols);
    let mut s = Vector::zeros(cols);
    let mut v_sorted = Matrix::zeros(cols, cols);
    let mut null_cols = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        v_sorted.set_column(k, &v.column(j));
        s[k] = norms[j];
        if norms[j] > null_tol && norms[j] > 0.0 {
            u.set_column(k, &(w.column(j) / norms[j]));
        } else {
            null_cols.push(k);
        }
    }
    complete_orthonormal(&mut u, &null_cols);
    Ok(Svd { u, s, v: v_sorted })
}

/// Orthogonalizes the columns of `w` (rows ≥ cols) in place; returns the
/// rotated matrix and the accumulated right rotation.
fn jacobi_sweeps(mut w: Matrix) -> Result<(Matrix, Matrix), LinalgError> {
    let n = w.ncols();
    let mut v = Matrix::identity(n, n);
    // Columns below this squared norm are rounding noise.
    let floor = (f64::EPSILON * w.norm()).powi(2);
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || alpha <= floor || beta <= floor || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                rotate(&mut w, p, q, c, sn);
                rotate(&mut v, p, q, c, sn);
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    Err(LinalgError::SvdNoConvergence(SVD_MAX_SWEEPS))
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (xp, xq) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = c * xp - s * xq;
        m[(r, q)] = s * xp + c * xq;
    }
}

/// Fills the listed (zero) columns of `u` with unit vectors orthogonal to
/// every other column, by Gram-Schmidt on the coordinate axes.
fn complete_orthonormal(u: &mut Matrix, missing: &[usize]) {
    let rows = u.nrows();
    let mut axis = 0;
    for &k in missing {
        while axis < rows {
            let mut e = Vector::zeros(rows);
            e[axis] = 1.0;
            axis += 1;
            for _ in 0..2 {
                for j in 0..u.ncols() {
                    if j != k {
                        let proj = u.column(j).dot(&e);
                        e.axpy(-proj, &u.column(j), 1.0);
                    }
                }
            }
            let norm = e.norm();
            if norm > 0.5 {
                u.set_column(k, &(e / norm));
                break;
            }
        }
    }
}

/// Numerical-rank cutoff `max(rows, cols) · ε · s_max`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Moore-Penrose inverse. Singular values below `rank_tol · s_max` are
/// treated as zero; `rank_tol` is relative to the largest singular value.
pub fn pinv(m: &Matrix, rank_tol: f64) -> Result<Matrix, LinalgError> {
    if rank_tol < 0.0 || rank_tol.is_nan() {
        return Err(LinalgError::NegativeRankTol(rank_tol));
    }
    let dec = svd(m)?;
    let cutoff = rank_tol * dec.max_singular_value();
    let (rows, cols) = m.shape();
    let mut out = Matrix::zeros(cols, rows);
    for (k, &s) in dec.s.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let vk = dec.v.column(k);
            let uk = dec.u.column(k);
            out.ger(1.0 / s, &vk, &uk, 1.0);
        }
    }
    Ok(out)
}

/// Minimum-Frobenius-norm solution of `min_A ‖(A·ΔX − ΔY)·D‖_F`, i.e.
/// `A = (ΔY·D)·(ΔX·D)†`.
///
/// `dx` is n×N, `dy` is m×N and `weights` has length N. The result is m×n.
pub fn weighted_minnorm_ls(
    dx: &Matrix,
    dy: &Matrix,
    weights: &[f64],
    rank_tol: Option<f64>,
) -> Result<Matrix, LinalgError> {
    let (n, cols) = dx.shape();
    let (m, cols_y) = dy.shape();
    if cols != cols_y || cols != weights.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "dx is {n}x{cols}, dy is {m}x{cols_y}, {} weights",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(LinalgError::NonFinite("weights"));
    }
    let mut dxw = dx.clone();
    let mut dyw = dy.clone();
    for (j, &w) in weights.iter().enumerate() {
        dxw.column_mut(j).scale_mut(w);
        dyw.column_mut(j).scale_mut(w);
    }
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(n, cols));
    let p = pinv(&dxw, tol)?;
    Ok(dyw * p)
}

/// Tikhonov-regularized least squares step `(AᵀA + λI)⁻¹ Aᵀ r`.
///
/// Evaluated through the SVD of `A` as `Σ sₖ/(sₖ² + λ) vₖ uₖᵀ r`, which stays
/// finite for every `λ > 0` even when `A` is rank deficient.
pub fn regularized_solve(a: &Matrix, residual: &Vector, lambda: f64) -> Result<Vector, LinalgError> {
    if !(lambda > 0.0) {
        return Err(LinalgError::NonPositiveLambda(lambda));
    }
    let (m, n) = a.shape();
    if residual.len() != m {
        return Err(LinalgError::DimensionMismatch(format!(
            "A is {m}x{n} but residual has length {}",
            residual.len()
        )));
    }
    if residual.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite("residual"));
    }
    let dec = svd(a)?;
    let mut delta = Vector::zeros(n);
    for (k, &s) in dec.s.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let coeff = dec.u.column(k).dot(residual) * s / (s * s + lambda);
        delta.axpy(coeff, &dec.v.column(k), 1.0);
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_singular_values() {
        let d = svd(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(d.s.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_singular_values_sorted() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 3.0]);
        let d = svd(&m).unwrap();
        assert_abs_diff_eq!(d.s[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn svd_rejects_nan() {
        let m = Matrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(matches!(svd(&m), Err(LinalgError::NonFinite(_))));
    }

    #[test]
    fn pinv_of_invertible_is_inverse() {
        let m = Matrix::from_row_slice(2, 2, &[4.0, 7.0, 2.0, 6.0]);
        let p = pinv(&m, default_rank_tol(2, 2)).unwrap();
        let inv = m.clone().try_inverse().unwrap();
        assert!((p - inv).abs().max() < 1e-12);
    }

    #[test]
    fn pinv_of_zero_is_zero() {
        let p = pinv(&Matrix::zeros(3, 2), 1e-12).unwrap();
        assert_eq!(p.shape(), (2, 3));
        assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pinv_negative_tol_is_error() {
        assert!(pinv(&Matrix::identity(2, 2), -1.0).is_err());
    }

    #[test]
    fn minnorm_ls_dimension_mismatch() {
        let dx = Matrix::zeros(2, 3);
        let dy = Matrix::zeros(1, 4);
        let err = weighted_minnorm_ls(&dx, &dy, &[1.0; 3], None).unwrap_err();
        assert!(matches!(err, LinalgError::DimensionMismatch(_)));
    }

    #[test]
    fn minnorm_ls_recovers_affine_slope() {
        let b = Matrix::from_row_slice(2, 2, &[1.5, -2.0, 0.25, 3.0]);
        let dx = Matrix::from_row_slice(2, 4, &[1.0, 0.0, -1.0, 2.0, 0.0, 1.0, 0.5, -1.0]);
        let dy = &b * &dx;
        let a = weighted_minnorm_ls(&dx, &dy, &[0.3, 2.0, 1.0, 0.7], None).unwrap();
        assert!((a - b).abs().max() < 1e-12);
    }

    #[test]
    fn regularized_solve_zero_residual() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let d = regularized_solve(&a, &Vector::zeros(2), 0.1).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn regularized_solve_scalar() {
        let a = Matrix::from_element(1, 1, 2.0);
        let d = regularized_solve(&a, &Vector::from_element(1, 1.0), 0.01).unwrap();
        assert_abs_diff_eq!(d[0], 2.0 / 4.01, epsilon = 1e-15);
    }

    #[test]
    fn regularized_solve_rejects_nonpositive_lambda() {
        let a = Matrix::identity(1, 1);
        let r = Vector::from_element(1, 1.0);
        assert!(matches!(
            regularized_solve(&a, &r, 0.0),
            Err(LinalgError::NonPositiveLambda(_))
        ));
        assert!(regularized_solve(&a, &r, -1.0).is_err());
    }

    #[test]
    fn large_lambda_damping_bound() {
        let a = Matrix::from_row_slice(3, 2, &[1.0, -2.0, 0.5, 4.0, 3.0, 1.0]);
        let r = Vector::from_row_slice(&[1.0, -1.0, 2.0]);
        let lambda = 1e12;
        let d = regularized_solve(&a, &r, lambda).unwrap();
        assert!(d.norm() <= (a.transpose() * &r).norm() / lambda);
    }
}
