use std::path::PathBuf;

use thiserror::Error;

/// Exit statuses shared by all subcommands.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const SINGULAR_HESSIAN: u8 = 2;
    pub const MAX_ITERATIONS: u8 = 3;
    pub const CONFIG: u8 = 4;
    pub const LEFT_VALIDITY_REGION: u8 = 5;
    pub const INSUFFICIENT_DATA: u8 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("trace schema error, line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] parnewton_core::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Schema { .. } => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Core(parnewton_core::Error::InsufficientData { .. }) => exit::INSUFFICIENT_DATA,
            CliError::Core(_) => exit::CONFIG,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
