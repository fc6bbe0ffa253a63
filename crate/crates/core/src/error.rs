use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown reference: {0}")]
    Reference(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("landmark coverage: {0}")]
    Coverage(String),

    #[error("sequence too short: {frames} frames, need at least {required}")]
    SequenceTooShort { frames: usize, required: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("training: {0}")]
    Training(String),

    #[error("fold for subject {subject} failed: {source}")]
    Fold {
        subject: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
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

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }
}
