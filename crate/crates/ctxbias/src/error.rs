use std::path::PathBuf;

use ctxbias_core::embformat::FormatError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const METRIC_FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: invalid UTF-8 at byte offset {offset}", path.display())]
    Utf8 { path: PathBuf, offset: usize },
    #[error("{}: {source}", path.display())]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    WordList { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ctxbias_core::Error),
}

impl AuditError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AuditError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AuditError::Config(_) => exit::USAGE,
            AuditError::Core(_) => exit::METRIC_FAILURE,
            _ => exit::IO,
        }
    }
}

pub type Result<T, E = AuditError> = std::result::Result<T, E>;
