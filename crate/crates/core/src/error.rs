use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}:{line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("invalid inventory: {0}")]
    Inventory(String),

    #[error("cannot align '{word}': {reason}")]
    Alignment { word: String, reason: String },

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("scoring error for '{word}': {reason}")]
    Scoring { word: String, reason: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }

    /// True when the error comes from bad caller arguments rather than bad data.
    pub fn is_argument(&self) -> bool {
        match self {
            Error::Argument(_) => true,
            Error::Fold { source, .. } => source.is_argument(),
            _ => false,
        }
    }
}
