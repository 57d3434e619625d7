//! Stiff initial-value integrator with bolus dose events.
//!
//! The stepper is Rodas3, a stiffly accurate, L-stable four-stage Rosenbrock
//! method of order 3 with an embedded order-2 error estimate: one LU
//! factorization of `1/(hγ) − J` per step and three extra `f` calls. Step
//! endpoints are forced onto every sample and event time, so no
//! interpolation is performed.
//!
//! Failures never panic: exceeding the step budget, collapsing the step size
//! or producing non-finite states all yield [`NotEvaluable`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Right-hand side `du/dt = g(t, u)` with parameters captured in `self`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]);

    /// Writes `∂g/∂u` into `jac` and returns `true`, or returns `false` to
    /// request a forward-difference Jacobian.
    fn jacobian(&self, _t: f64, _u: &[f64], _jac: &mut DMatrix<f64>) -> bool {
        false
    }

    /// `true` if `g` does not depend on `t` explicitly.
    fn autonomous(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoseMode {
    /// Overwrite the compartment with `amount`.
    Set,
    /// Add `amount` to the compartment.
    Add,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseEvent {
    pub time: f64,
    pub state_index: usize,
    pub amount: f64,
    pub mode: DoseMode,
}

impl DoseEvent {
    pub fn set(time: f64, state_index: usize, amount: f64) -> Self {
        Self { time, state_index, amount, mode: DoseMode::Set }
    }

    pub fn add(time: f64, state_index: usize, amount: f64) -> Self {
        Self { time, state_index, amount, mode: DoseMode::Add }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step attempts (accepted and rejected) before giving up.
    pub max_steps: usize,
    /// First step size; `None` picks one from the initial derivative.
    pub initial_step: Option<f64>,
    /// Largest step; `None` uses a tenth of the span up to the last sample
    /// time.
    pub max_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            abs_tol: 1e-6,
            max_steps: 200_000,
            initial_step: None,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum NotEvaluable {
    #[error("step budget of {0} exhausted")]
    StepBudget(usize),
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// Step statistics of one integration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
    pub rhs_evals: usize,
    pub jac_evals: usize,
    pub factorizations: usize,
}

/// States at the requested sample times; row `k` is the state at
/// `sample_times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
}

impl Solution {
    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.column(index).iter().copied().collect()
    }
}

/// Integrates from `t = 0`, applying `events` (sorted by time) and returning
/// the state at each of the strictly increasing `sample_times`. A sample that
/// coincides with an event sees the post-event state.
pub fn integrate<S: OdeSystem + ?Sized>(
    system: &S,
    u0: &[f64],
    events: &[DoseEvent],
    sample_times: &[f64],
    config: &IntegratorConfig,
) -> Result<Solution, NotEvaluable> {
    integrate_with_stats(system, u0, events, sample_times, config).0
}

/// Same as [`integrate`] but also reports step statistics, which are
/// returned even if the integration fails.
pub fn integrate_with_stats<S: OdeSystem + ?Sized>(
    system: &S,
    u0: &[f64],
    events: &[DoseEvent],
    sample_times: &[f64],
    config: &IntegratorConfig,
) -> (Result<Solution, NotEvaluable>, StepStats) {
    let mut stepper = Stepper::new(system, config);
    let result = stepper.solve(u0, events, sample_times);
    (result, stepper.finish_stats())
}

/// Step diagnostics for a run, for inspecting stiffness behavior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffnessReport {
    pub completed: bool,
    pub failure: Option<String>,
    pub stats: StepStats,
}

pub fn integrate_stiffness_check<S: OdeSystem + ?Sized>(
    system: &S,
    u0: &[f64],
    events: &[DoseEvent],
    sample_times: &[f64],
    config: &IntegratorConfig,
) -> StiffnessReport {
    let (res, stats) = integrate_with_stats(system, u0, events, sample_times, config);
    StiffnessReport {
        completed: res.is_ok(),
        failure: res.err().map(|e| e.to_string()),
        stats,
    }
}

/// Rodas3 tableau in the `(1/(hγ) − J) Kᵢ = f(Yᵢ) + Σ cᵢⱼ/h Kⱼ` form.
mod rodas3 {
    pub const STAGES: usize = 4;
    pub const GAMMA: f64 = 0.5;
    /// Strictly lower triangular, row-major: a21, a31, a32, a41, a42, a43.
    pub const A: [f64; 6] = [0.0, 2.0, 0.0, 2.0, 0.0, 1.0];
    pub const C: [f64; 6] = [4.0, 1.0, -1.0, 1.0, -1.0, -8.0 / 3.0];
    pub const M: [f64; 4] = [2.0, 0.0, 1.0, 1.0];
    pub const E: [f64; 4] = [0.0, 0.0, 0.0, 1.0];
    pub const ALPHA: [f64; 4] = [0.0, 0.0, 1.0, 1.0];
    pub const GAMMAS: [f64; 4] = [0.5, 1.5, 0.0, 0.0];
    /// Order of the embedded error estimate plus one.
    pub const ERR_ORDER: f64 = 3.0;

    pub const fn tri(i: usize, j: usize) -> usize {
        i * (i - 1) / 2 + j
    }
}

const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 6.0;
const FAC_SAFE: f64 = 0.9;

struct Stepper<'a, S: ?Sized> {
    system: &'a S,
    config: &'a IntegratorConfig,
    n: usize,
    stats: StepStats,
    attempts: usize,
    h_max: f64,
    jac: DMatrix<f64>,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    fn new(system: &'a S, config: &'a IntegratorConfig) -> Self {
        let n = system.dim();
        Self {
            system,
            config,
            n,
            stats: StepStats { min_step: f64::INFINITY, ..Default::default() },
            attempts: 0,
            h_max: f64::INFINITY,
            jac: DMatrix::zeros(n, n),
        }
    }

    fn finish_stats(mut self) -> StepStats {
        if !self.stats.min_step.is_finite() {
            self.stats.min_step = 0.0;
        }
        self.stats
    }

    fn f(&mut self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        let mut du = DVector::zeros(self.n);
        self.system.rhs(t, u.as_slice(), du.as_mut_slice());
        self.stats.rhs_evals += 1;
        du
    }

    fn update_jacobian(&mut self, t: f64, u: &DVector<f64>, fu: &DVector<f64>) {
        self.stats.jac_evals += 1;
        if self.system.jacobian(t, u.as_slice(), &mut self.jac) {
            return;
        }
        let mut up = u.clone();
        for j in 0..self.n {
            let delta = f64::EPSILON.sqrt() * u[j].abs().max(1e-5);
            up[j] = u[j] + delta;
            let fp = self.f(t, &up);
            let mut col = self.jac.column_mut(j);
            col.copy_from(&((fp - fu) / delta));
            up[j] = u[j];
        }
    }

    fn time_derivative(&mut self, t: f64, u: &DVector<f64>, fu: &DVector<f64>) -> Option<DVector<f64>> {
        if self.system.autonomous() {
            return None;
        }
        let dt = f64::EPSILON.sqrt() * t.abs().max(1.0);
        let ft = self.f(t + dt, u);
        Some((ft - fu) / dt)
    }

    fn solve(&mut self, u0: &[f64], events: &[DoseEvent], sample_times: &[f64]) -> Result<Solution, NotEvaluable> {
        if u0.len() != self.n {
            return Err(NotEvaluable::InvalidInput("initial state length"));
        }
        if sample_times.windows(2).any(|w| !(w[0] < w[1])) || sample_times.iter().any(|t| !t.is_finite()) {
            return Err(NotEvaluable::InvalidInput("sample times must be strictly increasing"));
        }
        if events.windows(2).any(|w| w[0].time > w[1].time)
            || events.iter().any(|e| !(e.time >= 0.0) || e.state_index >= self.n)
        {
            return Err(NotEvaluable::InvalidInput("events must be sorted, non-negative and in range"));
        }
        if !(self.config.rel_tol > 0.0 && self.config.abs_tol > 0.0) {
            return Err(NotEvaluable::InvalidInput("tolerances must be positive"));
        }

        self.h_max = match self.config.max_step {
            Some(h) if h > 0.0 => h,
            Some(_) => return Err(NotEvaluable::InvalidInput("max_step must be positive")),
            None => match sample_times.last() {
                Some(&t) if t > 0.0 => 0.1 * t,
                _ => f64::INFINITY,
            },
        };
        let mut u = DVector::from_column_slice(u0);
        let mut t = 0.0;
        let mut states = DMatrix::zeros(sample_times.len(), self.n);
        let mut next_event = 0;
        let mut h_prev: Option<f64> = self.config.initial_step;

        for (k, &ts) in sample_times.iter().enumerate() {
            if ts < 0.0 {
                return Err(NotEvaluable::InvalidInput("sample times must be non-negative"));
            }
            loop {
                while next_event < events.len() && events[next_event].time <= t {
                    apply(&mut u, &events[next_event]);
                    next_event += 1;
                }
                let stop = match events.get(next_event) {
                    Some(e) if e.time < ts => e.time,
                    _ => ts,
                };
                if stop > t {
                    h_prev = Some(self.advance(&mut u, t, stop, h_prev)?);
                    t = stop;
                }
                if stop >= ts {
                    break;
                }
            }
            while next_event < events.len() && events[next_event].time <= ts {
                apply(&mut u, &events[next_event]);
                next_event += 1;
            }
            states.set_row(k, &u.transpose());
        }
        Ok(Solution { times: sample_times.to_vec(), states })
    }

    /// Starting step from the scaled sizes of `u`, `f` and a finite
    /// difference estimate of the second derivative.
    fn initial_step(&mut self, t0: f64, t1: f64, u: &DVector<f64>, fu: &DVector<f64>) -> f64 {
        let span = t1 - t0;
        let rtol = self.config.rel_tol;
        let atol = self.config.abs_tol;
        let n = self.n.max(1) as f64;
        let rms = |v: &DVector<f64>, base: &DVector<f64>| {
            let sum: f64 = v
                .iter()
                .zip(base.iter())
                .map(|(&vi, &bi)| (vi / (atol + rtol * bi.abs())).powi(2))
                .sum();
            (sum / n).sqrt()
        };
        let d0 = rms(u, u);
        let d1 = rms(fu, u);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let u1 = u + fu * h0;
        let f1 = self.f(t0 + h0, &u1);
        let d2 = if f1.iter().all(|v| v.is_finite()) { rms(&(f1 - fu), u) / h0 } else { f64::INFINITY };
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(1.0 / rodas3::ERR_ORDER)
        };
        (100.0 * h0).min(h1).min(span).max(16.0 * f64::EPSILON * t0.abs().max(1.0))
    }

    /// Integrates from `t0` to exactly `t1`; returns the next proposed step.
    fn advance(&mut self, u: &mut DVector<f64>, t0: f64, t1: f64, h_hint: Option<f64>) -> Result<f64, NotEvaluable> {
        let mut t = t0;
        let mut f0 = self.f(t, u);
        if f0.iter().any(|v| !v.is_finite()) {
            return Err(NotEvaluable::NonFinite(t));
        }
        let mut h = match h_hint {
            Some(h) if h > 0.0 => h,
            _ => self.initial_step(t0, t1, u, &f0),
        };
        h = h.min(self.h_max);

        while t < t1 {
            let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
            self.update_jacobian(t, u, &f0);
            let tdot = self.time_derivative(t, u, &f0);

            let mut fac_max = FAC_MAX;
            loop {
                self.attempts += 1;
                if self.attempts > self.config.max_steps {
                    return Err(NotEvaluable::StepBudget(self.config.max_steps));
                }
                if h < h_min {
                    return Err(NotEvaluable::StepSizeUnderflow(t));
                }
                let remaining = t1 - t;
                let hit_end = h >= remaining || remaining - h <= h_min;
                let h_step = if hit_end { remaining } else { h };
                match self.try_step(t, u, &f0, tdot.as_ref(), h_step) {
                    Some((u_new, err)) if err <= 1.0 => {
                        let f_new = self.f(t + h_step, &u_new);
                        if f_new.iter().any(|v| !v.is_finite()) {
                            return Err(NotEvaluable::NonFinite(t + h_step));
                        }
                        self.stats.accepted += 1;
                        self.stats.min_step = self.stats.min_step.min(h_step);
                        self.stats.max_step = self.stats.max_step.max(h_step);
                        t = if hit_end { t1 } else { t + h_step };
                        *u = u_new;
                        f0 = f_new;
                        h = (h_step * step_factor(err).min(fac_max)).min(self.h_max);
                        break;
                    }
                    Some((_, err)) if err.is_finite() => {
                        self.stats.rejected += 1;
                        h = h_step * step_factor(err).min(1.0);
                        fac_max = 1.0;
                    }
                    _ => {
                        self.stats.rejected += 1;
                        h = h_step * FAC_MIN;
                        fac_max = 1.0;
                    }
                }
            }
        }
        Ok(h)
    }

    /// One Rodas3 step of size `h`; returns the new state and the scaled
    /// max-norm error, or `None` if the stage matrix is singular or a stage is
    /// non-finite.
    fn try_step(
        &mut self,
        t: f64,
        u: &DVector<f64>,
        f0: &DVector<f64>,
        tdot: Option<&DVector<f64>>,
        h: f64,
    ) -> Option<(DVector<f64>, f64)> {
        use rodas3::*;
        let n = self.n;
        let mut w = -&self.jac;
        for i in 0..n {
            w[(i, i)] += 1.0 / (h * GAMMA);
        }
        self.stats.factorizations += 1;
        let lu = w.lu();
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(STAGES);
        for s in 0..STAGES {
            let mut rhs = if s == 0 {
                f0.clone()
            } else {
                let mut y = u.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[tri(s, j)];
                    if a != 0.0 {
                        y.axpy(a, kj, 1.0);
                    }
                }
                self.f(t + ALPHA[s] * h, &y)
            };
            for (j, kj) in k.iter().enumerate() {
                rhs.axpy(C[tri(s, j)] / h, kj, 1.0);
            }
            if let Some(td) = tdot {
                rhs.axpy(GAMMAS[s] * h, td, 1.0);
            }
            let ks = lu.solve(&rhs)?;
            if ks.iter().any(|v| !v.is_finite()) {
                return None;
            }
            k.push(ks);
        }
        let mut u_new = u.clone();
        let mut err_vec = DVector::zeros(n);
        for s in 0..STAGES {
            u_new.axpy(M[s], &k[s], 1.0);
            if E[s] != 0.0 {
                err_vec.axpy(E[s], &k[s], 1.0);
            }
        }
        let rtol = self.config.rel_tol;
        let atol = self.config.abs_tol;
        let err = (0..n)
            .map(|i| err_vec[i].abs() / (atol + rtol * u[i].abs().max(u_new[i].abs())))
            .fold(0.0, f64::max)
            .max(1e-10);
        Some((u_new, err))
    }
}

fn step_factor(err: f64) -> f64 {
    (FAC_SAFE / err.powf(1.0 / rodas3::ERR_ORDER)).clamp(FAC_MIN, FAC_MAX)
}

fn apply(u: &mut DVector<f64>, e: &DoseEvent) {
    match e.mode {
        DoseMode::Set => u[e.state_index] = e.amount,
        DoseMode::Add => u[e.state_index] += e.amount,
    }
}
