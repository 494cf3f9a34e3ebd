use thiserror::Error;

use crate::solvers::SolverKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The iteration budget ran out. `best` is the last iterate and
    /// `violation` its worst KKT (or residual) violation.
    #[error("{solver:?} hit the iteration limit after {iterations} iterations (violation {violation:e})")]
    IterationLimit {
        solver: SolverKind,
        iterations: usize,
        violation: f64,
        best: Vec<f64>,
    },

    #[error("oracle found {candidates} KKT points; instance is degenerate")]
    OracleAmbiguity { candidates: usize },

    #[error("penalty sandwich violated by {violation:e}")]
    SandwichViolated { violation: f64 },

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }
}
