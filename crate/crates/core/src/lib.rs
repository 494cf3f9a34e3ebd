//! Obstacle problems for the restricted fractional Laplacian `(−Δ)^s`,
//! `0 < s < 1`, on a bounded interval with zero exterior data.
//!
//! * [`operator`] assembles the discrete operator, a symmetric Toeplitz
//!   M-matrix.
//! * [`solvers`] computes the obstacle solution by projected SOR, projected
//!   gradient, a primal-dual active-set method, a penalty method, and an
//!   exhaustive enumeration oracle.
//! * [`verify`] checks computed solutions against the comparison, bound and
//!   complementarity properties the continuous problem enjoys.
//! * [`cli`] is the config-driven front end behind the `fracobs` binary.


pub mod cli;
pub mod error;
pub mod operator;
pub mod solvers;
pub mod vector;
pub mod verify;


pub use error::{Error, Result};
pub use operator::{kernel_constant, FracLapOperator, Grid};
pub use solvers::{ProblemSpec, Solution, SolverKind, SolverParams};
