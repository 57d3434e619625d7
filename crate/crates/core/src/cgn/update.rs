use super::{CgnConfig, ClusterState};
use crate::linalg::Vector;
use crate::parallel::Executor;
use crate::problem::Problem;

/// Outcome for one member in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct MemberOutcome {
    pub attempted: bool,
    pub accepted: bool,
}

/// Evaluates the proposals and applies accept/reject.
///
/// `proposals[i]` must be `Some` for every member that is not frozen. A step
/// is accepted only on a strict SSR decrease; otherwise (including failed
/// evaluations) the member is restored and its λ grows tenfold. Frozen
/// members are copied with λ×10 and cost no evaluation.
pub fn update_cluster(
    state: &ClusterState,
    proposals: &[Option<Vector>],
    problem: &Problem,
    config: &CgnConfig,
) -> ClusterState {
    update_with(state, proposals, problem, config, &Executor::new(config.workers)).0
}

pub(crate) fn update_with(
    state: &ClusterState,
    proposals: &[Option<Vector>],
    problem: &Problem,
    config: &CgnConfig,
    exec: &Executor,
) -> (ClusterState, Vec<MemberOutcome>) {
    assert_eq!(proposals.len(), state.len(), "one proposal slot per member");
    let trials = exec.map(state.len(), |i| {
        if state.frozen[i] {
            return None;
        }
        let x = proposals[i].as_ref().expect("non-frozen member needs a proposal");
        Some(problem.evaluate(x.as_slice()).map(|y| {
            let r = problem.ssr(&y);
            (y, r)
        }))
    });

    let mut next = state.clone();
    next.iteration = state.iteration + 1;
    let mut outcomes = Vec::with_capacity(state.len());
    for (i, trial) in trials.into_iter().enumerate() {
        let mut outcome = MemberOutcome { attempted: false, accepted: false };
        match trial {
            None => next.lambda[i] *= 10.0,
            Some(result) => {
                outcome.attempted = true;
                next.evaluations += 1;
                match result {
                    Some((y, r)) if r < state.ssr[i] => {
                        next.x.set_column(i, proposals[i].as_ref().unwrap());
                        next.y.set_column(i, &y);
                        next.ssr[i] = r;
                        next.lambda[i] /= 10.0;
                        outcome.accepted = true;
                    }
                    _ => next.lambda[i] *= 10.0,
                }
            }
        }
        next.frozen[i] = next.lambda[i] > config.lambda_max;
        outcomes.push(outcome);
    }
    (next, outcomes)
}
