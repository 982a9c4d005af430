use std::path::Path;

use thiserror::Error;

/// Failure classes, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Acceptance(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Acceptance(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// Tags a library error with the config key it came from.
    pub(crate) fn at(key: &str, e: helmsrc::Error) -> Self {
        match e {
            helmsrc::Error::Io(e) => CliError::Io(format!("{key}: {e}")),
            other => CliError::Config(format!("{key}: {other}")),
        }
    }

    /// Library errors raised while reading an input file.
    pub(crate) fn input(path: &Path, e: helmsrc::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
