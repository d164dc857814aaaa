use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// County lake lists do not partition the lake set.
    #[error("county lake lists do not partition the lakes: {0}")]
    PartitionViolation(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{count} profiles exceed the enumeration cap of {cap}")]
    TooLarge { count: u128, cap: u128 },

    #[error("{}", format_location(.path, .line, .message))]
    Format {
        path: Option<PathBuf>,
        line: Option<u64>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Format {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn with_path(self, path: &std::path::Path) -> Self {
        match self {
            Error::Format { line, message, .. } => Error::Format {
                path: Some(path.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }
}

fn format_location(path: &Option<PathBuf>, line: &Option<u64>, message: &str) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("{}:{}: {}", p.display(), l, message),
        (Some(p), None) => format!("{}: {}", p.display(), message),
        (None, Some(l)) => format!("line {}: {}", l, message),
        (None, None) => message.to_string(),
    }
}
