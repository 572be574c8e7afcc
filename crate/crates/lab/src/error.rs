use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] viboost_core::Error),
}

impl LabError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration, parse and input problems, 3
    /// for numerical failures inside the algorithms.
    pub fn exit_code(&self) -> i32 {
        use viboost_core::Error as E;
        match self {
            LabError::Parse { .. } | LabError::Config(_) | LabError::Io { .. } => 2,
            LabError::Core(E::Dataset(_) | E::EmptySpace | E::Precondition(_) | E::Index { .. }) => 2,
            LabError::Core(_) => 3,
        }
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
