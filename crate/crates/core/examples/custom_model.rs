//! Fitting a user-defined model: a two-parameter exponential decay.

use std::sync::Arc;

use cgn::cgn::run;
use cgn::{CgnConfig, FnModel, Problem};

fn main() {
    let times = [0.5, 1.0, 2.0, 4.0, 8.0];
    let model = FnModel::new(2, times.len(), move |x: &[f64]| {
        Some(times.iter().map(|t| x[0] * (-x[1] * t).exp()).collect())
    });
    let y: Vec<f64> = times.iter().map(|t| 3.0 * (-0.4 * t).exp()).collect();
    let problem = Problem::new(Arc::new(model), y, vec![0.1, 0.01], vec![10.0, 2.0]).unwrap();

    let cfg = CgnConfig { cluster_size: 30, k_max: 25, ..Default::default() };
    let (state, trace) = run(&problem, &cfg).unwrap();
    let best = (0..state.len()).min_by(|&a, &b| state.ssr[a].total_cmp(&state.ssr[b])).unwrap();
    println!("evaluations {}, iterations {}", trace.total_evals(), trace.iterations());
    println!("best member {:?} with SSR {:.3e}", state.member_x(best).as_slice(), state.ssr[best]);
}
