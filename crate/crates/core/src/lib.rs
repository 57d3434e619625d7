//! Cluster Gauss-Newton method for nonlinear least-squares problems with
//! many (or non-unique) approximate minimizers, together with a multi-start
//! Levenberg-Marquardt baseline, a stiff ODE integrator and a suite of
//! pharmacokinetic benchmark problems.

pub mod baseline;
pub mod cgn;
pub mod harness;
pub mod linalg;
pub mod ode;
mod parallel;
pub mod problem;
pub mod problems;

pub use cgn::{CgnConfig, CgnError, ClusterState, RunTrace};
pub use linalg::{Matrix, Vector};
pub use problem::{FnModel, Model, Problem, ResidualScale};
