use thiserror::Error;

/// Errors reported by the numerical routines.
///
/// Payload values are converted to `f64` so the error type does not depend on
/// the scalar parameter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge (eigenrelation residual {residual:e})")]
    EigenNonConvergence { residual: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("iteration collapsed onto the trivial solution u = 0 after {iterations} iterations")]
    TrivialSolution { iterations: usize, trace: Vec<f64> },

    #[error("constraint value not reached for multipliers in [{lo:e}, {hi:e}]")]
    BracketNotFound {
        lo: f64,
        hi: f64,
        /// Sampled `(lambda, G)` pairs.
        samples: Vec<(f64, f64)>,
    },

    #[error("descent stagnated after {iterations} iterations (stationarity residual {residual:e})")]
    Stagnation {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("precondition violated: {0}")]
    Rejected(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
