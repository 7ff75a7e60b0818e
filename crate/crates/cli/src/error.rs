use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),

    #[error("numerical failure: {0}")]
    Numerical(quarantine_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Output { .. } => 3,
        }
    }
}

impl From<quarantine_core::Error> for CliError {
    fn from(e: quarantine_core::Error) -> Self {
        match e {
            quarantine_core::Error::Domain { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
