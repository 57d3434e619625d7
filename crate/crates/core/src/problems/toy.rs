//! One-dimensional function with a flat global minimum on `[−1, 1]` and
//! many local minima outside it.

use crate::problem::Model;

/// Starting points used to contrast cluster and gradient steps.
pub const TOY_STARTS: [f64; 5] = [-6.3797853, -4.1656025, -3.6145728, 2.0755468, 4.1540421];

/// Target value: the global minimum of [`eval_toy`].
pub const TOY_TARGET: f64 = 3.0;

pub fn eval_toy(x: f64) -> f64 {
    if x < -1.0 {
        (x + 1.0).powi(2) - 2.0 * (10.0 * (x + 1.0)).cos() + 5.0
    } else if x <= 1.0 {
        3.0
    } else {
        (x - 1.0).powi(2) - 2.0 * (10.0 * (x - 1.0)).cos() + 5.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ToyModel;

impl Model for ToyModel {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_y(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![eval_toy(x[0])])
    }
}
