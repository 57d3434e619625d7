use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CgnConfig, CgnError};
use crate::linalg::{Matrix, Vector};
use crate::parallel::Executor;
use crate::problem::Problem;

/// Snapshot of the cluster at one iteration.
///
/// Column `i` of `x` (n×N) and `y` (m×N) holds member `i`; `y` is in residual
/// space and always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub iteration: usize,
    pub x: Matrix,
    pub y: Matrix,
    pub ssr: Vec<f64>,
    pub lambda: Vec<f64>,
    pub frozen: Vec<bool>,
    /// Cumulative model evaluations, failed attempts included.
    pub evaluations: u64,
}

impl ClusterState {
    pub fn len(&self) -> usize {
        self.ssr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ssr.is_empty()
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| f).count()
    }

    pub fn all_frozen(&self) -> bool {
        self.frozen.iter().all(|&f| f)
    }

    pub fn member_x(&self, i: usize) -> Vector {
        self.x.column(i).into_owned()
    }

    pub fn member_y(&self, i: usize) -> Vector {
        self.y.column(i).into_owned()
    }

    /// Builds a state from explicit starting points (columns of `starts`).
    /// Every start must be evaluable.
    pub fn from_points(problem: &Problem, starts: &Matrix, config: &CgnConfig) -> Result<Self, CgnError> {
        let n = problem.dim_x();
        if starts.nrows() != n {
            return Err(CgnError::InvalidConfig(format!(
                "starting points have {} rows, problem has {n} parameters",
                starts.nrows()
            )));
        }
        let exec = Executor::new(config.workers);
        let outputs = exec.map(starts.ncols(), |i| {
            let xi: Vec<f64> = starts.column(i).iter().copied().collect();
            problem.evaluate(&xi)
        });
        let mut ys = Vec::with_capacity(outputs.len());
        for (i, y) in outputs.into_iter().enumerate() {
            ys.push(y.ok_or(CgnError::Initialization { member: i, attempts: 1 })?);
        }
        Ok(Self::assemble(problem, starts.clone(), ys, config, starts.ncols() as u64))
    }

    fn assemble(problem: &Problem, x: Matrix, ys: Vec<Vector>, config: &CgnConfig, evaluations: u64) -> Self {
        let m = problem.dim_y();
        let n_members = ys.len();
        let mut y = Matrix::zeros(m, n_members);
        let mut ssr = Vec::with_capacity(n_members);
        for (i, yi) in ys.iter().enumerate() {
            y.set_column(i, yi);
            ssr.push(problem.ssr(yi));
        }
        let lambda = vec![config.lambda_init; n_members];
        let frozen = lambda.iter().map(|&l| l > config.lambda_max).collect();
        Self {
            iteration: 0,
            x,
            y,
            ssr,
            lambda,
            frozen,
            evaluations,
        }
    }
}

/// Random stream for member `index`, derived from the master seed.
pub fn member_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws `N` members uniformly from the problem box, re-sampling any member
/// whose model evaluation fails.
pub fn create_initial_cluster(problem: &Problem, config: &CgnConfig) -> Result<ClusterState, CgnError> {
    config.validate(problem.dim_x())?;
    let n = problem.dim_x();
    let lo = problem.range_lo();
    let hi = problem.range_hi();
    let exec = Executor::new(config.workers);
    let draws = exec.map(config.cluster_size, |i| {
        let mut rng = member_rng(config.seed, i);
        for attempt in 1..=config.max_resample {
            let xi: Vec<f64> = (0..n)
                .map(|j| lo[j] + (hi[j] - lo[j]) * rng.random::<f64>())
                .collect();
            if let Some(y) = problem.evaluate(&xi) {
                return Ok((xi, y, attempt as u64));
            }
        }
        Err(CgnError::Initialization {
            member: i,
            attempts: config.max_resample,
        })
    });
    let mut x = Matrix::zeros(n, config.cluster_size);
    let mut ys = Vec::with_capacity(config.cluster_size);
    let mut evaluations = 0;
    for (i, draw) in draws.into_iter().enumerate() {
        let (xi, y, attempts) = draw?;
        x.set_column(i, &Vector::from_vec(xi));
        ys.push(y);
        evaluations += attempts;
    }
    Ok(ClusterState::assemble(problem, x, ys, config, evaluations))
}
