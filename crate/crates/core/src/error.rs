use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment drivers.
#[derive(Debug, Error)]
pub enum FracError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("assembly error at node {node} (x = {x}): {reason}")]
    Assembly { node: usize, x: f64, reason: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    /// A non-positive eigenvalue makes the fractional power undefined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("insufficient data: {usable} usable points, need at least {required}")]
    InsufficientData { usable: usize, required: usize },

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FracError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(FracError::InvalidArgument(msg.into()))
}
