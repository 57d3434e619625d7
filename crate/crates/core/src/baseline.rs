//! Levenberg-Marquardt with a forward-difference Jacobian, run independently
//! from each starting point.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix, Vector};
use crate::parallel::Executor;
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LmConfig {
    pub lambda_init: f64,
    pub lambda_max: f64,
    /// Relative forward-difference step.
    pub fd_step: f64,
    /// Stop when `‖Δx‖ < step_tol·(1 + ‖x‖)`.
    pub step_tol: f64,
    /// Stop when an accepted step lowers the SSR by less than this fraction.
    pub ssr_tol: f64,
    /// Evaluation budget per start; `None` means `100·n`.
    pub max_evals: Option<u64>,
    pub workers: usize,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            lambda_init: 0.01,
            lambda_max: 1e10,
            fd_step: 1e-6,
            step_tol: 1e-6,
            ssr_tol: 1e-6,
            max_evals: None,
            workers: 1,
        }
    }
}

impl LmConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda_init > 0.0 && self.lambda_init.is_finite()) {
            return Err(format!("lambda_init must be positive, got {}", self.lambda_init));
        }
        if !(self.lambda_max >= self.lambda_init) {
            return Err(format!("lambda_max {} is below lambda_init", self.lambda_max));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(format!("fd_step must be positive, got {}", self.fd_step));
        }
        Ok(())
    }

    pub fn budget(&self, dim_x: usize) -> u64 {
        self.max_evals.unwrap_or(100 * dim_x as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmStatus {
    /// Step or SSR change fell below tolerance.
    Converged,
    /// Evaluation budget exhausted.
    EvalBudget,
    /// Damping exceeded `lambda_max`.
    Stalled,
    /// The start or a Jacobian column was not evaluable.
    Failed,
}

/// One trial step of a single LM run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmStep {
    /// SSR of the current iterate after the trial.
    pub ssr: f64,
    /// Damping after the trial.
    pub lambda: f64,
    pub accepted: bool,
    /// Evaluations used by this run so far.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartResult {
    pub start_index: usize,
    pub x: Vector,
    pub ssr: f64,
    pub evaluations: u64,
    pub iterations: usize,
    pub status: LmStatus,
    pub lambda: f64,
    pub steps: Vec<LmStep>,
    /// Best SSR after each evaluation, for evaluation-count curves.
    pub ssr_by_eval: Vec<f64>,
}

/// A perturbed point of the finite-difference Jacobian was not evaluable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JacobianFailure {
    pub column: usize,
}

/// Forward-difference Jacobian of the residual-space output; column `j` uses
/// the step `fd_step·max(|x_j|, 1)`. Returns the Jacobian and the number of
/// evaluations spent (`n` on success).
pub fn fd_jacobian(problem: &Problem, x: &Vector, y: &Vector, fd_step: f64) -> (Result<Matrix, JacobianFailure>, u64) {
    let n = x.len();
    let mut jac = Matrix::zeros(y.len(), n);
    for j in 0..n {
        let mut xp = x.clone();
        xp[j] += fd_step * x[j].abs().max(1.0);
        let h = xp[j] - x[j];
        match problem.evaluate(xp.as_slice()) {
            Some(yp) => jac.set_column(j, &((yp - y) / h)),
            None => return (Err(JacobianFailure { column: j }), j as u64 + 1),
        }
    }
    (Ok(jac), n as u64)
}

struct Tracker {
    evaluations: u64,
    best: f64,
    history: Vec<f64>,
}

impl Tracker {
    fn record(&mut self, count: u64, ssr: Option<f64>) {
        for _ in 0..count {
            self.evaluations += 1;
            self.history.push(self.best);
        }
        if let Some(s) = ssr {
            if s < self.best {
                self.best = s;
                if let Some(last) = self.history.last_mut() {
                    *last = s;
                }
            }
        }
    }
}

/// Runs LM from a single start.
pub fn lm_single(problem: &Problem, x0: &[f64], config: &LmConfig) -> StartResult {
    let budget = config.budget(problem.dim_x());
    let mut tr = Tracker { evaluations: 0, best: f64::INFINITY, history: Vec::new() };
    let mut x = Vector::from_column_slice(x0);
    let mut steps = Vec::new();
    let mut lambda = config.lambda_init;
    let finish = |x: Vector, ssr: f64, lambda: f64, steps: Vec<LmStep>, status: LmStatus, tr: Tracker| StartResult {
        start_index: 0,
        x,
        ssr,
        evaluations: tr.evaluations,
        iterations: steps.len(),
        status,
        lambda,
        steps,
        ssr_by_eval: tr.history,
    };

    let y0 = problem.evaluate(x.as_slice());
    tr.record(1, y0.as_ref().map(|y| problem.ssr(y)));
    let Some(mut y) = y0 else {
        return finish(x, f64::INFINITY, lambda, steps, LmStatus::Failed, tr);
    };
    let mut ssr = problem.ssr(&y);
    let mut jac: Option<Matrix> = None;

    loop {
        if tr.evaluations >= budget {
            return finish(x, ssr, lambda, steps, LmStatus::EvalBudget, tr);
        }
        if lambda > config.lambda_max {
            return finish(x, ssr, lambda, steps, LmStatus::Stalled, tr);
        }
        let a = match jac.take() {
            Some(a) => a,
            None => {
                if tr.evaluations + problem.dim_x() as u64 > budget {
                    return finish(x, ssr, lambda, steps, LmStatus::EvalBudget, tr);
                }
                let (a, used) = fd_jacobian(problem, &x, &y, config.fd_step);
                tr.record(used, None);
                match a {
                    Ok(a) => a,
                    Err(e) => {
                        log::debug!("jacobian column {} not evaluable", e.column);
                        return finish(x, ssr, lambda, steps, LmStatus::Failed, tr);
                    }
                }
            }
        };
        let residual = problem.target() - &y;
        let delta = match linalg::regularized_solve(&a, &residual, lambda) {
            Ok(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => return finish(x, ssr, lambda, steps, LmStatus::Failed, tr),
        };
        if delta.norm() < config.step_tol * (1.0 + x.norm()) {
            return finish(x, ssr, lambda, steps, LmStatus::Converged, tr);
        }
        let x_new = &x + &delta;
        let y_new = problem.evaluate(x_new.as_slice());
        let ssr_new = y_new.as_ref().map(|yn| problem.ssr(yn));
        tr.record(1, ssr_new);
        match (y_new, ssr_new) {
            (Some(yn), Some(s)) if s < ssr => {
                let rel = (ssr - s) / ssr.max(f64::MIN_POSITIVE);
                x = x_new;
                y = yn;
                ssr = s;
                lambda /= 10.0;
                steps.push(LmStep { ssr, lambda, accepted: true, evaluations: tr.evaluations });
                if rel < config.ssr_tol {
                    return finish(x, ssr, lambda, steps, LmStatus::Converged, tr);
                }
            }
            _ => {
                // The Jacobian at the unchanged iterate is reused.
                jac = Some(a);
                lambda *= 10.0;
                steps.push(LmStep { ssr, lambda, accepted: false, evaluations: tr.evaluations });
            }
        }
    }
}

/// Runs [`lm_single`] from every column of `starts`; results are in column
/// order regardless of the worker count.
pub fn lm_multistart(problem: &Problem, starts: &Matrix, config: &LmConfig) -> Vec<StartResult> {
    let exec = Executor::new(config.workers);
    exec.map(starts.ncols(), |i| {
        let x0: Vec<f64> = starts.column(i).iter().copied().collect();
        StartResult { start_index: i, ..lm_single(problem, &x0, config) }
    })
}
