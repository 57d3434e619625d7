//! Sensitivity of CGN to the distance-weight exponent on the flip-flop
//! problem with 10% noise. All runs share one dataset and start cluster.

use cgn::harness::{sweep, ExperimentSpec, Solver, SweepAxis};
use cgn::problems::ProblemId;

fn main() {
    let base = ExperimentSpec {
        problem: ProblemId::FlipFlop,
        solver: Solver::Cgn,
        n: 60,
        k_max: 30,
        noise: Some(0.1),
        out: std::env::temp_dir().join("cgn_sweep_example"),
        ..Default::default()
    };
    let runs = sweep(&base, SweepAxis::Gamma, &[0.0, 0.5, 1.0, 2.0]).unwrap();
    for r in &runs {
        println!("{}: {} acceptable, {} evaluations", r.out_dir.display(), r.summary.acceptable_count, r.summary.total_evals);
    }
}
