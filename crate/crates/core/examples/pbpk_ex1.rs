//! CGN and multi-start LM on the 9-parameter PBPK problem from the same
//! starting cluster. Pass N and k_max as arguments for larger runs.

use cgn::harness::{run_experiment, ExperimentSpec, Solver};
use cgn::problems::ProblemId;

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(20);
    let k_max = args.next().unwrap_or(20);
    let dir = std::env::temp_dir().join("cgn_pbpk_example");
    for solver in [Solver::Cgn, Solver::Lm] {
        let spec = ExperimentSpec {
            problem: ProblemId::PbpkEx1,
            solver,
            n,
            k_max,
            lm_max_evals: Some(100),
            out: dir.join(solver.as_str()),
            ..Default::default()
        };
        let s = run_experiment(&spec).unwrap().summary;
        println!(
            "{:6}: {} evaluations, {} acceptable of {}, best SSR {:.4} (truth {:.4})",
            s.solver, s.total_evals, s.acceptable_count, s.n, s.best_ssr, s.truth_ssr
        );
    }
    println!("artifacts in {}", dir.display());
}
