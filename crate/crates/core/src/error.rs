use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("description `{0}` is empty after normalization")]
    EmptyDescription(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid sparse vector: {0}")]
    InvalidVector(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no alternate candidate left in the pool")]
    PoolExhausted,

    #[error("unknown taxonomy node `{0}`")]
    UnknownNode(String),

    #[error("taxonomy: {0}")]
    Taxonomy(String),

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("malformed record: {0}")]
    Malformed(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("no record could be ingested from {path}: {errors} malformed record(s)")]
    NothingIngested { path: PathBuf, errors: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
