use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Schema { path: PathBuf, line: usize, message: String },
    #[error("invalid phrase {0:?}")]
    InvalidPhrase(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("empty pattern set")]
    EmptyPatternSet,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("key {0:?} is missing from the inventory")]
    MissingKey(String),
    #[error("no valid snippet window")]
    NoValidWindow,
    #[error("phrase pool has {available} usable entries, need {needed}")]
    PoolTooSmall { available: usize, needed: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty reference")]
    EmptyReference,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
