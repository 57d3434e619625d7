mod common;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ::cgn::baseline::{lm_multistart, lm_single, LmConfig, LmStatus};
use ::cgn::cgn::{construct_linear_approximation, create_initial_cluster, run, run_from_state, update_cluster, ClusterState};
use ::cgn::{CgnConfig, FnModel, Matrix, Model, Problem};
use proptest::prelude::*;

/// Counts every call to the wrapped closure.
struct Counted<F> {
    inner: FnModel<F>,
    calls: Arc<AtomicU64>,
}

impl<F> Model for Counted<F>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync,
{
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.eval(x)
    }
}

fn counted<F>(n: usize, m: usize, f: F, y: Vec<f64>, lo: f64, hi: f64) -> (Problem, Arc<AtomicU64>)
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
{
    let calls = Arc::new(AtomicU64::new(0));
    let model = Counted { inner: FnModel::new(n, m, f), calls: calls.clone() };
    (Problem::new(Arc::new(model), y, vec![lo; n], vec![hi; n]).unwrap(), calls)
}

fn nonlinear(x: &[f64]) -> Option<Vec<f64>> {
    Some(vec![x[0] * x[0] + x[1], (x[0] - x[1]).sin(), x[1] * x[1] * x[1] - x[0]])
}

#[test]
fn lm_two_iteration_accounting() {
    // Start, n Jacobian evaluations, one trial, then n more after the
    // accepted step and one more trial: 1 + 2 + 1 + 2 + 1 = 7.
    let (p, calls) = counted(2, 3, nonlinear, vec![1.0, 0.2, 0.5], -3.0, 3.0);
    let cfg = LmConfig { max_evals: Some(7), ..Default::default() };
    let r = lm_single(&p, &[1.5, -1.0], &cfg);
    assert_eq!(r.evaluations, calls.load(Ordering::SeqCst));
    assert_eq!(r.evaluations, 7);
    assert_eq!(r.status, LmStatus::EvalBudget);
    assert_eq!(r.steps.len(), 2);
    assert_eq!(r.steps[0].evaluations, 4);
    assert_eq!(r.steps[1].evaluations, 7);
    assert!(r.steps[0].accepted, "from this start the first GN step descends");
}

#[test]
fn lm_reuses_jacobian_after_rejection() {
    let (p, calls) = counted(2, 3, nonlinear, vec![1.0, 0.2, 0.5], -3.0, 3.0);
    let r = lm_single(&p, &[1.5, -1.0], &LmConfig::default());
    assert_eq!(r.evaluations, calls.load(Ordering::SeqCst));
    assert_eq!(r.ssr_by_eval.len() as u64, r.evaluations);
    // start + one per trial + n per Jacobian; rejections add no Jacobian.
    let trials = r.steps.len() as u64;
    let accepted = r.steps.iter().filter(|s| s.accepted).count() as u64;
    let jac_evals = r.evaluations - 1 - trials;
    assert_eq!(jac_evals % 2, 0);
    assert!(jac_evals / 2 <= 1 + accepted, "{r:?}");
    assert!(r.steps.iter().any(|s| !s.accepted), "expected at least one rejection");
}

#[test]
fn lm_quadratic_converges_to_zero() {
    let (p, _) = counted(1, 1, |x: &[f64]| Some(vec![x[0] * x[0]]), vec![0.0], -2.0, 2.0);
    let r = lm_single(&p, &[1.0], &LmConfig::default());
    assert!(r.x[0].abs() <= 1e-4, "{r:?}");
}

#[test]
fn cgn_toy_pinned_evaluations() {
    use ::cgn::problems::{self, DataOptions, ProblemId};
    let inst = problems::build(ProblemId::Toy1d, &DataOptions::defaults_for(ProblemId::Toy1d, 0)).unwrap();
    let starts = Matrix::from_row_slice(1, 5, &ProblemId::Toy1d.pinned_starts().unwrap().concat());
    let cfg = CgnConfig { cluster_size: 5, k_max: 10, ..Default::default() };
    let state = ClusterState::from_points(&inst.problem, &starts, &cfg).unwrap();
    let (_, trace) = run_from_state(&inst.problem, state, &cfg).unwrap();
    assert_eq!(trace.total_evals(), 50);
    assert_eq!(trace.records.len(), 10);
}

#[test]
fn linear_models_cost_no_evaluations() {
    let (p, calls) = counted(2, 3, nonlinear, vec![1.0, 0.2, 0.5], -2.0, 2.0);
    let cfg = CgnConfig { cluster_size: 12, ..Default::default() };
    let state = create_initial_cluster(&p, &cfg).unwrap();
    let before = calls.load(Ordering::SeqCst);
    for i in 0..state.len() {
        construct_linear_approximation(&state, i, p.range_lo(), p.range_hi(), &cfg).unwrap();
    }
    assert_eq!(calls.load(Ordering::SeqCst), before);
    assert_eq!(state.evaluations, before);
}

#[test]
fn affine_problem_solved() {
    let f = |x: &[f64]| Some(vec![2.0 * x[0] - x[1] + 1.0, x[0] + 3.0 * x[1], x[0] - 0.5]);
    let (p, _) = counted(2, 3, f, vec![2.0, 4.0, 0.5], -5.0, 5.0);
    let (state, trace) = run(&p, &CgnConfig { cluster_size: 20, k_max: 31, ..Default::default() }).unwrap();
    // Consistent data: solution (1, 1).
    assert!(state.ssr.iter().all(|&s| s <= 1e-10), "{:?}", state.ssr);
    assert!(trace.iterations() <= 30);
}

#[test]
fn unevaluable_proposals_are_rejected() {
    // Undefined for x > 1: proposals landing there are rejected, not fatal.
    let f = |x: &[f64]| if x[0] > 1.0 { None } else { Some(vec![x[0] - 2.0]) };
    let (p, calls) = counted(1, 1, f, vec![0.0], -1.0, 1.0);
    let (state, trace) = run(&p, &CgnConfig { cluster_size: 6, k_max: 8, ..Default::default() }).unwrap();
    assert_eq!(trace.total_evals(), calls.load(Ordering::SeqCst));
    assert!(state.x.iter().all(|&v| v <= 1.0));
}

fn uniform_problem(n: usize) -> Problem {
    Problem::new(
        Arc::new(FnModel::new(n, 1, |x: &[f64]| Some(vec![x.iter().sum()]))),
        vec![0.0],
        vec![-1.0; n],
        vec![3.0; n],
    )
    .unwrap()
}

/// Initial members are uniform on the box: each coordinate has mean
/// (lo+hi)/2 and variance (hi−lo)²/12.
#[test]
fn initial_cluster_moments() {
    let p = uniform_problem(3);
    let cfg = CgnConfig { cluster_size: 4000, seed: 11, ..Default::default() };
    let state = create_initial_cluster(&p, &cfg).unwrap();
    for l in 0..3 {
        let v: Vec<f64> = state.x.row(l).iter().copied().collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = common::sample_sd(&v).powi(2);
        // Five standard errors.
        assert!((mean - 1.0).abs() < 5.0 * (16.0f64 / 12.0 / 4000.0).sqrt(), "mean {mean}");
        assert!((var - 16.0 / 12.0).abs() < 0.1, "variance {var}");
        assert!(v.iter().all(|&x| (-1.0..=3.0).contains(&x)));
    }
}

fn test_problem() -> Problem {
    Problem::new(Arc::new(FnModel::new(2, 3, nonlinear)), vec![1.0, 0.2, 0.5], vec![-2.0; 2], vec![2.0; 2]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// SSR traces never increase, λ stays positive, frozen ⇔ λ > λ_max, and
    /// evaluations follow the attempted count.
    #[test]
    fn cgn_invariants(seed in any::<u64>(), n in 3usize..16, gamma in 0.0f64..2.0) {
        let p = test_problem();
        let cfg = CgnConfig { cluster_size: n, seed, gamma, k_max: 15, lambda_max: 1e4, ..Default::default() };
        let (state, trace) = run(&p, &cfg).unwrap();
        for i in 0..n {
            let s = trace.member_ssr(i);
            prop_assert!(s.windows(2).all(|w| w[1] <= w[0]));
        }
        prop_assert!(state.lambda.iter().all(|&l| l > 0.0));
        for i in 0..n {
            prop_assert_eq!(state.frozen[i], state.lambda[i] > cfg.lambda_max);
        }
        for w in trace.records.windows(2) {
            let attempted = w[1].attempted.iter().filter(|&&a| a).count() as u64;
            prop_assert_eq!(w[1].cum_evals - w[0].cum_evals, attempted);
        }
        prop_assert!(trace.total_evals() <= (n * cfg.k_max) as u64 + trace.records[0].cum_evals - n as u64);
    }

    #[test]
    fn update_damping_rules(seed in any::<u64>()) {
        let p = test_problem();
        let cfg = CgnConfig { cluster_size: 6, seed, ..Default::default() };
        let state = create_initial_cluster(&p, &cfg).unwrap();
        // Propose each member's own position: a tie, which must be rejected.
        let same: Vec<_> = (0..6).map(|i| Some(state.member_x(i))).collect();
        let next = update_cluster(&state, &same, &p, &cfg);
        for i in 0..6 {
            prop_assert_eq!(next.ssr[i], state.ssr[i]);
            prop_assert!((next.lambda[i] - state.lambda[i] * 10.0).abs() < 1e-15);
        }
        prop_assert_eq!(next.evaluations, state.evaluations + 6);
    }

    #[test]
    fn results_do_not_depend_on_workers(seed in any::<u64>()) {
        let p = test_problem();
        let base = CgnConfig { cluster_size: 10, seed, k_max: 8, ..Default::default() };
        let (s1, t1) = run(&p, &CgnConfig { workers: 1, ..base.clone() }).unwrap();
        let (s8, t8) = run(&p, &CgnConfig { workers: 8, ..base.clone() }).unwrap();
        prop_assert_eq!(s1, s8);
        prop_assert_eq!(t1, t8);
        let lm = LmConfig::default();
        let a = lm_multistart(&p, &create_initial_cluster(&p, &base).unwrap().x, &lm);
        let b = lm_multistart(&p, &create_initial_cluster(&p, &base).unwrap().x, &LmConfig { workers: 8, ..lm });
        prop_assert_eq!(a, b);
    }
}
