use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (largest asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error(
        "Jacobi eigensolver did not converge after {sweeps} sweeps \
         (off-diagonal norm {off_norm:.3e}, matrix norm {norm:.3e})"
    )]
    NoConvergence {
        sweeps: usize,
        off_norm: f64,
        norm: f64,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported body: {0}")]
    Unsupported(String),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("normalization violated: {0}")]
    Normalization(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("Monte Carlo estimate did not mix: {0}")]
    NotMixing(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
