use thiserror::Error;

/// Errors raised by the library.
///
/// `Unsupported` and `InvalidParameter` describe bad input; `CheckFailed`
/// means an exact verification did not hold; `Cache` covers on-disk state.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("element budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },

    #[error("coefficient overflow in fixed-width operator arithmetic")]
    Overflow,

    #[error("cache error: {0}")]
    Cache(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
