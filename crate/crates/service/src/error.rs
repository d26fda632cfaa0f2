use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] linematch::Error),

    #[error("unknown query `{0}`")]
    UnknownQuery(String),

    #[error("unknown pool candidate `{0}`")]
    UnknownCandidate(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("unsupported payload version {0}")]
    SchemaVersion(u32),

    #[error("no snapshot for version {0}")]
    SnapshotNotFound(u64),

    #[error("event log corrupt at line {line}: {message}")]
    CorruptLog { line: usize, message: String },

    #[error("cannot replay record {seq}: {message}")]
    Replay { seq: u64, message: String },

    #[error("snapshot taken over pool {found}, serving pool {expected}")]
    PoolMismatch { expected: String, found: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ServiceError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ServiceError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
