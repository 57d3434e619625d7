//! Closed-form one-compartment models with non-identifiable parameters.

use nalgebra::DMatrix;

use crate::ode::OdeSystem;
use crate::problem::Model;

pub const PK_DOSE: f64 = 100.0;

pub const FLIPFLOP_TIMES: [f64; 8] = [0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 24.0];
pub const IV_TIMES: [f64; 6] = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0];

/// `(e^{−a t} − e^{−b t}) / (b − a)`, symmetric in `a`, `b` and stable when
/// they are close.
fn exp_difference(a: f64, b: f64, t: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let gap = hi - lo;
    if gap == 0.0 {
        t * (-lo * t).exp()
    } else {
        (-lo * t).exp() * -(-gap * t).exp_m1() / gap
    }
}

/// Plasma concentration of the oral one-compartment model with
/// `CL = 10^x1`, `Ka = 10^x2`, `V = 10^x3` after a dose of 100 into the gut.
pub fn eval_flipflop(x: &[f64], times: &[f64]) -> Vec<f64> {
    let cl = 10f64.powf(x[0]);
    let ka = 10f64.powf(x[1]);
    let v = 10f64.powf(x[2]);
    let ke = cl / v;
    times
        .iter()
        .map(|&t| PK_DOSE * ka / v * exp_difference(ke, ka, t))
        .collect()
}

/// The other parameter triple producing the same concentration curve:
/// absorption and elimination rates are exchanged and the volume rescaled so
/// `CL` is unchanged.
pub fn flipflop_swap(x: &[f64]) -> [f64; 3] {
    [x[0], x[0] - x[2], x[0] - x[1]]
}

/// Amount remaining after an intravenous dose of 100, `CL = 10^x1`,
/// `V = 10^x2`. Depends on `x` only through `x1 − x2`.
pub fn eval_iv_amount(x: &[f64], times: &[f64]) -> Vec<f64> {
    let k = 10f64.powf(x[0] - x[1]);
    times.iter().map(|&t| PK_DOSE * (-k * t).exp()).collect()
}

#[derive(Debug, Clone)]
pub struct FlipFlopModel {
    pub times: Vec<f64>,
}

impl Default for FlipFlopModel {
    fn default() -> Self {
        Self { times: FLIPFLOP_TIMES.to_vec() }
    }
}

impl Model for FlipFlopModel {
    fn dim_x(&self) -> usize {
        3
    }
    fn dim_y(&self) -> usize {
        self.times.len()
    }
    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(eval_flipflop(x, &self.times))
    }
}

#[derive(Debug, Clone)]
pub struct IvAmountModel {
    pub times: Vec<f64>,
}

impl Default for IvAmountModel {
    fn default() -> Self {
        Self { times: IV_TIMES.to_vec() }
    }
}

impl Model for IvAmountModel {
    fn dim_x(&self) -> usize {
        2
    }
    fn dim_y(&self) -> usize {
        self.times.len()
    }
    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(eval_iv_amount(x, &self.times))
    }
}

/// The flip-flop model as an ODE: `u1` is the amount in the gut, `u2` the
/// plasma concentration.
#[derive(Debug, Clone, Copy)]
pub struct FlipFlopOde {
    pub ka: f64,
    pub cl: f64,
    pub v: f64,
}

impl FlipFlopOde {
    pub fn from_log10(x: &[f64]) -> Self {
        Self {
            cl: 10f64.powf(x[0]),
            ka: 10f64.powf(x[1]),
            v: 10f64.powf(x[2]),
        }
    }
}

impl OdeSystem for FlipFlopOde {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) {
        du[0] = -self.ka * u[0];
        du[1] = (self.ka * u[0] - self.cl * u[1]) / self.v;
    }
    fn jacobian(&self, _t: f64, _u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        jac[(0, 0)] = -self.ka;
        jac[(0, 1)] = 0.0;
        jac[(1, 0)] = self.ka / self.v;
        jac[(1, 1)] = -self.cl / self.v;
        true
    }
    fn autonomous(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flipflop_starts_at_zero() {
        assert_eq!(eval_flipflop(&[0.0, 0.3, 1.0], &[0.0]), vec![0.0]);
    }

    #[test]
    fn flipflop_equal_rates_limit() {
        // ke = Ka = 1: u2 = 100·t·e^{−t}/V with V = 1.
        let c = eval_flipflop(&[0.0, 0.0, 0.0], &[2.0]);
        assert!((c[0] - 200.0 * (-2.0f64).exp()).abs() < 1e-12);
        let near = eval_flipflop(&[0.0, 1e-9, 0.0], &[2.0]);
        assert!((near[0] - c[0]).abs() < 1e-6);
    }

    #[test]
    fn flipflop_nonnegative_for_extreme_parameters() {
        for x in [[4.0, -4.0, 0.0], [-4.0, 4.0, 3.0], [3.0, 3.0, -3.0]] {
            for v in eval_flipflop(&x, &FLIPFLOP_TIMES) {
                assert!(v >= 0.0 && v.is_finite(), "{x:?} -> {v}");
            }
        }
    }

    #[test]
    fn swap_is_an_involution() {
        let x = [0.2, -0.4, 1.1];
        let back = flipflop_swap(&flipflop_swap(&x));
        for j in 0..3 {
            assert!((back[j] - x[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn iv_amount_values() {
        assert_eq!(eval_iv_amount(&[0.3, -1.0], &[0.0]), vec![100.0]);
        let v = eval_iv_amount(&[0.7, 0.7], &[1.0]);
        assert!((v[0] - 100.0 / std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn iv_amount_line_of_minimizers() {
        let a = eval_iv_amount(&[0.25, 1.0], &IV_TIMES);
        let b = eval_iv_amount(&[0.25 + 2.0, 1.0 + 2.0], &IV_TIMES);
        assert_eq!(a, b);
    }
}
