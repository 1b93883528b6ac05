use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("unknown filter '{filter}'; valid names: {valid}")]
    UnknownFilter { filter: String, valid: String },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("scenario '{scenario}': {source}")]
    Kernel {
        scenario: String,
        #[source]
        source: cliffield::error::Error,
    },

    #[error("resource cap: {0}")]
    ResourceCap(String),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ResourceCap(_) => EXIT_RESOURCE,
            CliError::Kernel { source: cliffield::error::Error::ResourceCap(_), .. } => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        }
    }

    pub fn kernel(scenario: &str) -> impl Fn(cliffield::error::Error) -> CliError + '_ {
        move |source| CliError::Kernel { scenario: scenario.to_string(), source }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
