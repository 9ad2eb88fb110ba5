use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A Cholesky pivot was not positive; `index` is the failing diagonal index.
    #[error("matrix is not positive definite (pivot at index {index})")]
    NotPositiveDefinite { index: usize },

    /// A triangular solve hit a zero diagonal entry.
    #[error("singular triangular factor (zero diagonal at index {index})")]
    SingularFactor { index: usize },

    /// A worksheet check failed in strict mode.
    #[error("loop invariant violated at boundary k={k}, quadrant {quadrant}: residual {residual:e}")]
    InvariantViolated {
        k: usize,
        quadrant: String,
        residual: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("matrix market parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
