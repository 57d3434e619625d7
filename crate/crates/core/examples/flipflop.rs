//! The oral one-compartment model has two parameter sets giving the same
//! curve (ka and the elimination rate swap roles). CGN recovers both.

use cgn::cgn::run;
use cgn::problems::pk::flipflop_swap;
use cgn::problems::{self, DataOptions, ProblemId};
use cgn::CgnConfig;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let id = ProblemId::FlipFlop;
    let inst = problems::build(id, &DataOptions::defaults_for(id, 0)).unwrap();
    let truth = id.truth_x();
    let twin = flipflop_swap(&truth);
    println!("truth {truth:?}, twin {twin:?}");

    let (state, trace) = run(&inst.problem, &CgnConfig { cluster_size: n, k_max: 40, ..Default::default() }).unwrap();
    let (mut near_truth, mut near_twin) = (0, 0);
    for i in 0..state.len() {
        if state.ssr[i] >= 1e-4 {
            continue;
        }
        let x = state.member_x(i);
        let d = |p: &[f64]| x.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if d(&truth) < d(&twin) {
            near_truth += 1;
        } else {
            near_twin += 1;
        }
    }
    println!("{} evaluations; members with SSR < 1e-4 near truth {near_truth}, near twin {near_twin}", trace.total_evals());
}
