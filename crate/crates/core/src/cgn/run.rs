use super::approx::{construct_linear_approximation, propose_step};
use super::cluster::create_initial_cluster;
use super::update::update_with;
use super::{CgnConfig, CgnError, ClusterState};
use crate::parallel::Executor;
use crate::problem::Problem;

/// Per-iteration record. Iteration 0 is the initial cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub ssr: Vec<f64>,
    pub lambda: Vec<f64>,
    pub accepted: Vec<bool>,
    pub attempted: Vec<bool>,
    pub cum_evals: u64,
}

impl IterationRecord {
    fn initial(state: &ClusterState) -> Self {
        Self {
            iteration: 0,
            ssr: state.ssr.clone(),
            lambda: state.lambda.clone(),
            accepted: vec![false; state.len()],
            attempted: vec![true; state.len()],
            cum_evals: state.evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
}

impl RunTrace {
    pub fn total_evals(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cum_evals)
    }

    /// Number of main iterations performed.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// SSR history of one member across all records.
    pub fn member_ssr(&self, i: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.ssr[i]).collect()
    }
}

/// Creates the initial cluster and iterates.
pub fn run(problem: &Problem, config: &CgnConfig) -> Result<(ClusterState, RunTrace), CgnError> {
    let state = create_initial_cluster(problem, config)?;
    run_from_state(problem, state, config)
}

/// Iterates from a given initial state, stopping early once every member is
/// frozen.
///
/// The initial cluster counts as the first of the `k_max` iterations, so at
/// most `k_max − 1` update steps are taken and a run evaluates the model at
/// most `N·k_max` times plus initial resamples.
pub fn run_from_state(
    problem: &Problem,
    mut state: ClusterState,
    config: &CgnConfig,
) -> Result<(ClusterState, RunTrace), CgnError> {
    config.validate(problem.dim_x())?;
    let exec = Executor::new(config.workers);
    let mut trace = RunTrace {
        records: vec![IterationRecord::initial(&state)],
    };
    let lo = problem.range_lo();
    let hi = problem.range_hi();
    let target = problem.target();
    for _ in 1..config.k_max {
        if state.all_frozen() {
            break;
        }
        let snapshot = &state;
        let proposals = exec.map(state.len(), |i| {
            if snapshot.frozen[i] {
                return Ok(None);
            }
            let model = construct_linear_approximation(snapshot, i, lo, hi, config)?;
            propose_step(&model, snapshot.lambda[i], target).map(Some)
        });
        let proposals = proposals.into_iter().collect::<Result<Vec<_>, CgnError>>()?;
        let (next, outcomes) = update_with(&state, &proposals, problem, config, &exec);
        trace.records.push(IterationRecord {
            iteration: next.iteration,
            ssr: next.ssr.clone(),
            lambda: next.lambda.clone(),
            accepted: outcomes.iter().map(|o| o.accepted).collect(),
            attempted: outcomes.iter().map(|o| o.attempted).collect(),
            cum_evals: next.evaluations,
        });
        state = next;
    }
    Ok((state, trace))
}
