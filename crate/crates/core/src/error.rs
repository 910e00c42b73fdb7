use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed JSON: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),

    #[error("line {line}: label must be \"Yes\" or \"No\", got {value:?}")]
    InvalidLabel { line: usize, value: String },

    #[error("class {class} has {available} samples, {requested} requested")]
    InsufficientClass {
        class: crate::corpus::Label,
        available: usize,
        requested: usize,
    },

    #[error("sample {0:?} has no label")]
    Unlabeled(String),

    #[error("training set is empty")]
    EmptyTrainSet,

    #[error("validation set is empty")]
    EmptyValidSet,

    #[error("model has not been trained")]
    Untrained,

    #[error("{0}")]
    Domain(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("ids missing from predictions: {}", .0.join(", "))]
    MissingIds(Vec<String>),

    #[error("silver id {0:?} not found in pool")]
    UnknownSilverId(String),

    #[error("silver id {0:?} collides with a training id")]
    SilverCollision(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("remote backend: {0}")]
    Remote(String),

    #[error("model artifact: {0}")]
    Artifact(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
