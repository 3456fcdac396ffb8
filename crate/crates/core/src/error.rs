use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("capacity exceeded: {required} tiles required, {available} available")]
    Capacity { required: usize, available: usize },

    #[error("trap at instruction {index}: {msg}")]
    Trap { index: usize, msg: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
