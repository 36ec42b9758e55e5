use std::io;

use thiserror::Error;

/// Harness errors, split by the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, dataset or arguments: exit code 2.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Anything that fails while running: exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<riemsub::Error> for CliError {
    fn from(e: riemsub::Error) -> Self {
        match e {
            riemsub::Error::InnerSolver(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            CliError::Runtime(format!("I/O error: {e}"))
        } else {
            CliError::Invalid(format!("malformed CSV: {e}"))
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Invalid(msg.into()))
}
