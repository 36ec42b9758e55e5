use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Array shapes or component counts do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A parameter, dataset or configuration violates its contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A DCA subproblem could not be solved.
    #[error("inner solver failed: {0}")]
    InnerSolver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn dimension<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
