use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible: {reason}")]
    Infeasible {
        reason: String,
        witness: Option<Vec<f64>>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("violation search inconclusive: {0}")]
    Inconclusive(String),

    #[error("profile not strictly increasing at scale (epsilon {0:e})")]
    NotStrictlyIncreasing(f64),

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
