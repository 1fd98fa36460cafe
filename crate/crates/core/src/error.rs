use std::path::PathBuf;

/// Errors produced by the simulator and the GeMM library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input shape error: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("value {value} out of range [{lo}, {hi}]")]
    Range { value: i64, lo: i64, hi: i64 },

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("32-bit accumulator overflow: {0}")]
    Overflow(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
