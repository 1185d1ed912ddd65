use std::path::{Path, PathBuf};

use periodic_rl::{ModelError, RunError};
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{source_name}: {error}")]
    Model { source_name: String, error: ModelError },
    #[error("{0}")]
    Invalid(String),
    #[error("run {label} seed {seed}: {error}")]
    Run { label: String, seed: u64, error: RunError },
    #[error(transparent)]
    Analysis(#[from] RunError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn config(path: &Path, e: ConfigError) -> Self {
        CliError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// 1 for invalid input or failed checks, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Model { .. } | CliError::Invalid(_) => 1,
            CliError::Run { .. } | CliError::Analysis(_) | CliError::Io { .. } | CliError::Runtime(_) => 2,
        }
    }
}
