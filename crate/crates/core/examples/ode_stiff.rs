//! Robertson's chemical kinetics: a classic stiff system integrated with
//! the linearly implicit solver.

use cgn::ode::{self, IntegratorConfig, OdeSystem};
use nalgebra::DMatrix;

struct Robertson;

impl OdeSystem for Robertson {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) {
        du[0] = -0.04 * u[0] + 1e4 * u[1] * u[2];
        du[1] = 0.04 * u[0] - 1e4 * u[1] * u[2] - 3e7 * u[1] * u[1];
        du[2] = 3e7 * u[1] * u[1];
    }
    fn jacobian(&self, _t: f64, u: &[f64], j: &mut DMatrix<f64>) -> bool {
        j[(0, 0)] = -0.04;
        j[(0, 1)] = 1e4 * u[2];
        j[(0, 2)] = 1e4 * u[1];
        j[(1, 0)] = 0.04;
        j[(1, 1)] = -1e4 * u[2] - 6e7 * u[1];
        j[(1, 2)] = -1e4 * u[1];
        j[(2, 0)] = 0.0;
        j[(2, 1)] = 6e7 * u[1];
        j[(2, 2)] = 0.0;
        true
    }
    fn autonomous(&self) -> bool {
        true
    }
}

fn main() {
    let times = [0.4, 4.0, 40.0, 400.0, 4000.0, 40000.0];
    let cfg = IntegratorConfig { rel_tol: 1e-6, abs_tol: 1e-10, ..Default::default() };
    let (sol, stats) = ode::integrate_with_stats(&Robertson, &[1.0, 0.0, 0.0], &[], &times, &cfg);
    let sol = sol.unwrap();
    for (i, t) in sol.times.iter().enumerate() {
        let u = sol.states.row(i);
        println!("t {t:8.1}  {:.6e} {:.6e} {:.6e}", u[0], u[1], u[2]);
    }
    println!("{stats:?}");
}
