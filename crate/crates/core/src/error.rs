use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tridiagonal pivot {pivot:e} at row {row} is below tolerance")]
    SingularPivot { row: usize, pivot: f64 },

    #[error("non-positive pivot {pivot:e} at row {row} in symmetric factorisation")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("mode {mode}: homogeneous terminal value {value:e} is not positive")]
    NonPositiveMode { mode: usize, value: f64 },

    #[error("cached operator fingerprint mismatch")]
    FingerprintMismatch,

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
