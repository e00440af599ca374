use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{path}, line {line}: {message}")]
    Data { path: String, line: u64, message: String },

    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Library(#[from] rkbs::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn data(path: &Path, line: u64, message: impl Into<String>) -> Self {
        CliError::Data {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
