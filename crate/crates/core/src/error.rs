use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate record (prompt_id={prompt_id:?}, rollout_id={rollout_id:?})")]
    DuplicateRecord {
        line: usize,
        prompt_id: String,
        rollout_id: String,
    },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
