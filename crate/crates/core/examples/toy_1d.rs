//! The one-dimensional plateau problem from five fixed starts: CGN leaves
//! the flat region while LM started on the plateau has no gradient to follow.

use cgn::baseline::{lm_multistart, LmConfig};
use cgn::cgn::{run_from_state, ClusterState};
use cgn::problems::{self, DataOptions, ProblemId};
use cgn::{CgnConfig, Matrix};

fn main() {
    let id = ProblemId::Toy1d;
    let inst = problems::build(id, &DataOptions::defaults_for(id, 0)).unwrap();
    let starts = Matrix::from_row_slice(1, 5, &id.pinned_starts().unwrap().concat());

    let cfg = CgnConfig { cluster_size: 5, k_max: 10, ..Default::default() };
    let state = ClusterState::from_points(&inst.problem, &starts, &cfg).unwrap();
    let (state, trace) = run_from_state(&inst.problem, state, &cfg).unwrap();
    println!("CGN, {} evaluations:", trace.total_evals());
    for i in 0..state.len() {
        println!("  start {:6.2} -> x {:8.4}  SSR {:.3e}", starts[(0, i)], state.x[(0, i)], state.ssr[i]);
    }

    let lm = lm_multistart(&inst.problem, &starts, &LmConfig::default());
    println!("LM:");
    for r in &lm {
        println!("  start {:6.2} -> x {:8.4}  SSR {:.3e}  ({:?})", starts[(0, r.start_index)], r.x[0], r.ssr, r.status);
    }
}
