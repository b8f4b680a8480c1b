use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: edge endpoint {id} is not a known node id")]
    UnknownEndpoint { path: PathBuf, line: u64, id: i64 },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("class {0} has no training rows")]
    MissingClass(usize),

    #[error("cannot stratify: class {class} has {count} sample(s), need at least {required}")]
    Stratification {
        class: usize,
        count: usize,
        required: usize,
    },

    #[error("dimension mismatch: expected {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
