use std::path::PathBuf;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("need at least 2 distinct labels, found {0}")]
    TooFewLabels(usize),
    #[error("label {label:?} has {count} documents, fewer than the {n_folds} folds requested")]
    LabelTooSmall {
        label: String,
        count: usize,
        n_folds: usize,
    },
    #[error("invalid sizes: {0}")]
    InvalidSizes(String),
    #[error("unknown category index {0}")]
    UnknownCategory(usize),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown weighting scheme {0:?}")]
    UnknownScheme(String),
    #[error("kld needs at least 2 categories")]
    SingleCategory,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value in feature matrix at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("invalid configuration: {0}")]
    Config(String),
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

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
