use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the encoding, learning and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("divergence undefined: {0}")]
    UndefinedDivergence(String),

    #[error("degenerate training set: {0}")]
    TrainingDegenerate(String),

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("insufficient non-seizure data: required {required_s:.1} s, available {available_s:.1} s")]
    InsufficientData { required_s: f64, available_s: f64 },

    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

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

    pub(crate) fn parse(
        path: impl AsRef<std::path::Path>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            location: location.into(),
            message: message.into(),
        }
    }

    /// Whether the error originates from bad data rather than bad arguments.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Io { .. }
                | Error::DegenerateInput(_)
                | Error::InsufficientData { .. }
                | Error::UndefinedDivergence(_)
        )
    }
}
