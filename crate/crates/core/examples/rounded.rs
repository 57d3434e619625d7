//! Outputs rounded to one decimal make the model piecewise constant, so
//! finite-difference Jacobians are mostly zero. The cluster's global linear
//! fit still sees the trend.

use cgn::harness::{run_experiment, ExperimentSpec, Solver};
use cgn::problems::ProblemId;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let dir = std::env::temp_dir().join("cgn_rounded_example");
    for solver in [Solver::Cgn, Solver::Lm] {
        let spec = ExperimentSpec {
            problem: ProblemId::PbpkEx1Rounded,
            solver,
            n,
            k_max: 10,
            lm_max_evals: Some(100),
            out: dir.join(solver.as_str()),
            ..Default::default()
        };
        let s = run_experiment(&spec).unwrap().summary;
        println!("{:6}: best SSR {:.4}, {} acceptable, {} evaluations", s.solver, s.best_ssr, s.acceptable_count, s.total_evals);
    }
}
