use std::io;

use thiserror::Error;

/// Failure of a CLI command, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

/// Wraps a numerical error from the core crate with the parameters that produced it.
pub(crate) fn numerical(err: szego_core::Error, context: impl std::fmt::Display) -> CliError {
    match err {
        szego_core::Error::InvalidParameter(msg) => CliError::Config(format!("{msg} ({context})")),
        other => CliError::Numerical(format!("{other} ({context})")),
    }
}
