//! Stochastic steepest descent (SSD) in Banach spaces, discretized with P1
//! finite elements on the unit square.
//!
//! The crate is organised bottom-up:
//!
//! * [`fem`]: structured triangular mesh, quadrature, sparse assembly and
//!   the linear / Newton solvers.
//! * [`random_field`]: truncated Karhunen-Loève sampler for Gaussian fields
//!   with covariance `(-Δ + τ²)^{-α}` under Neumann conditions.
//! * [`duality`]: steepest-descent directions and dual norms in
//!   `W^{1,p}_0` and `L^p`.
//! * [`problems`]: the random p-Laplace energy and the semilinear optimal
//!   control problem.
//! * [`optimize`]: the SSD and SGD loops, step schedules and the rate
//!   diagnostic.
//! * [`cli`]: experiment configuration, runner and output files.

pub mod cli;
pub mod duality;
pub mod error;
pub mod fem;
pub mod optimize;
pub mod problems;
pub mod random_field;

pub use error::{Error, Result};
