//! Cluster Gauss-Newton method.
//!
//! A cluster of `N` points drawn from a user box is moved simultaneously.
//! Each member is updated with a Tikhonov-damped Gauss-Newton step whose
//! slope matrix is fitted by weighted least squares over the function
//! values of the whole cluster, so no Jacobian (and no extra model
//! evaluation) is needed per step. Members accept a step only when their SSR
//! strictly decreases; λ is divided by 10 on acceptance and multiplied by 10
//! otherwise, and a member freezes once λ exceeds `lambda_max`.

mod approx;
mod cluster;
mod config;
mod run;
mod update;

pub use approx::{compute_weights, construct_linear_approximation, propose_step, LinearModel};
pub use cluster::{create_initial_cluster, member_rng, ClusterState};
pub use config::CgnConfig;
pub use run::{run, run_from_state, IterationRecord, RunTrace};
pub use update::update_cluster;

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CgnError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("could not evaluate member {member} after {attempts} attempts")]
    Initialization { member: usize, attempts: usize },
    #[error("member {0} has no other cluster points to fit a linear approximation")]
    DegenerateCluster(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
