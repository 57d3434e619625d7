//! Reference implementations used as independent oracles by the
//! integration tests. Nothing here calls into the crate's numerics.

#![allow(dead_code)]

use cgn::linalg::{Matrix, Vector};

/// One-sided Jacobi SVD of an m×n matrix: returns `(u, s, v)` with
/// `a = u·diag(s)·vᵀ`, `s` unsorted.
pub fn jacobi_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let transposed = a.nrows() < a.ncols();
    let mut w = if transposed { a.transpose() } else { a.clone() };
    let n = w.ncols();
    let mut v = Matrix::identity(n, n);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.column(p).norm_squared();
                let beta: f64 = w.column(q).norm_squared();
                let gamma: f64 = w.column(p).dot(&w.column(q));
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt().max(f64::MIN_POSITIVE));
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let xp = m[(r, p)];
                        let xq = m[(r, q)];
                        m[(r, p)] = c * xp - s * xq;
                        m[(r, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let s: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut u = w.clone();
    for j in 0..n {
        if s[j] > 0.0 {
            u.column_mut(j).scale_mut(1.0 / s[j]);
        }
    }
    if transposed {
        (v, s, u)
    } else {
        (u, s, v)
    }
}

/// Pseudoinverse from the Jacobi SVD with relative cutoff `tol`.
pub fn pinv_oracle(a: &Matrix, tol: f64) -> Matrix {
    let (u, s, v) = jacobi_svd(a);
    let smax = s.iter().copied().fold(0.0, f64::max);
    let mut out = Matrix::zeros(a.ncols(), a.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if sk > tol * smax && sk > 0.0 {
            out += v.column(k) * u.column(k).transpose() / sk;
        }
    }
    out
}

/// Solves the square system `m·x = b` by Gaussian elimination with partial
/// pivoting.
pub fn gauss_solve(m: &Matrix, b: &Matrix) -> Matrix {
    let n = m.nrows();
    let mut a = m.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs())).unwrap();
        a.swap_rows(k, p);
        x.swap_rows(k, p);
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                a[(i, j)] -= f * a[(k, j)];
            }
            for j in 0..x.ncols() {
                x[(i, j)] -= f * x[(k, j)];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.ncols() {
            let mut acc = x[(k, j)];
            for i in k + 1..n {
                acc -= a[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc / a[(k, k)];
        }
    }
    x
}

/// Weighted minimum-norm LS slope. When `dx·D` has full row rank the
/// normal equations `A (XD²Xᵀ) = Y D² Xᵀ` are solved directly; otherwise the
/// Jacobi pseudoinverse is used. `tol` is the relative rank cutoff.
pub fn minnorm_oracle(dx: &Matrix, dy: &Matrix, w: &[f64], tol: f64) -> Matrix {
    let mut xd = dx.clone();
    let mut yd = dy.clone();
    for (j, &wj) in w.iter().enumerate() {
        xd.column_mut(j).scale_mut(wj);
        yd.column_mut(j).scale_mut(wj);
    }
    let (_, s, _) = jacobi_svd(&xd);
    let smax = s.iter().copied().fold(0.0, f64::max);
    let rank = s.iter().filter(|&&v| v > tol * smax && v > 0.0).count();
    if rank == xd.nrows() && s.iter().copied().fold(f64::INFINITY, f64::min) > 1e-3 * smax {
        let gram = &xd * xd.transpose();
        let rhs = (&yd * xd.transpose()).transpose();
        gauss_solve(&gram, &rhs).transpose()
    } else {
        &yd * pinv_oracle(&xd, tol)
    }
}

/// Classical fourth-order Runge-Kutta with a fixed step count; `None` once
/// the state leaves the finite range.
pub fn rk4<F>(f: F, u0: &[f64], t_end: f64, steps: usize) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let h = t_end / steps as f64;
    let mut u = u0.to_vec();
    let axpy = |u: &[f64], k: &[f64], c: f64| -> Vec<f64> { u.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    for _ in 0..steps {
        let k1 = f(&u);
        let k2 = f(&axpy(&u, &k1, h / 2.0));
        let k3 = f(&axpy(&u, &k2, h / 2.0));
        let k4 = f(&axpy(&u, &k3, h));
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > 1e100) {
            return None;
        }
    }
    Some(u)
}

/// Oral one-compartment concentration, written out directly.
pub fn two_exponential(dose: f64, cl: f64, ka: f64, v: f64, t: f64) -> f64 {
    let ke = cl / v;
    dose * ka / (v * (ka - ke)) * ((-ke * t).exp() - (-ka * t).exp())
}

/// Minimal CSV reader: header names and rows of raw string fields.
pub fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
    let rows = lines.filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

pub fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn vector(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}
