use thiserror::Error;

/// Errors raised by the numerical kernels, constructors and file readers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Evaluation at (or numerically at) a singular point.
    #[error("singularity: {0}")]
    Singularity(String),
    /// Invalid construction parameters.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The caller violated a usage contract (e.g. passing a normalized map
    /// where raw functional values are required).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
