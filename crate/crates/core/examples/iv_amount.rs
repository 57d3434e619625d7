//! Non-identifiable IV model: only the difference of the two parameters is
//! determined by the data, so acceptable minimizers fill a line.

use cgn::cgn::run;
use cgn::problems::{self, DataOptions, ProblemId};
use cgn::CgnConfig;

fn main() {
    let id = ProblemId::IvAmount;
    let inst = problems::build(id, &DataOptions::defaults_for(id, 0)).unwrap();
    let (state, _) = run(&inst.problem, &CgnConfig { cluster_size: 60, k_max: 30, ..Default::default() }).unwrap();
    let mut diffs = Vec::new();
    for i in 0..state.len() {
        if state.ssr[i] < inst.truth_ssr() {
            let x = state.member_x(i);
            diffs.push((x[0], x[1], x[0] - x[1]));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
    println!("{} acceptable of {}", diffs.len(), state.len());
    for (a, b, d) in diffs.iter().step_by((diffs.len() / 10).max(1)) {
        println!("  x = ({a:7.3}, {b:7.3})  difference {d:.4}");
    }
}
