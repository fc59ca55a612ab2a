use std::fmt;
use std::io;
use std::path::PathBuf;

/// Error type shared by the whole toolkit.
#[derive(Debug)]
pub enum KantsError {
    /// Filesystem-level failure on `path`.
    Io { path: PathBuf, source: io::Error },
    /// Structured text (CSV, model file, config) failed to parse; `line` is 1-based.
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    /// A hyperparameter or argument is outside its documented range.
    InvalidParam(String),
    /// The data itself is unusable (empty set, dimension mismatch, ...).
    Data(String),
}

impl KantsError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        KantsError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        KantsError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        KantsError::InvalidParam(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        KantsError::Data(message.into())
    }
}

impl fmt::Display for KantsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KantsError::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            KantsError::Parse {
                path,
                line,
                message,
            } => write!(f, "{}:{}: {}", path.display(), line, message),
            KantsError::InvalidParam(msg) => write!(f, "invalid parameter: {}", msg),
            KantsError::Data(msg) => write!(f, "{}", msg),
        }
    }
}

impl std::error::Error for KantsError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            KantsError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, KantsError>;
