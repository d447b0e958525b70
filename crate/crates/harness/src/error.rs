use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid state in {path}: {source}")]
    InvalidState {
        path: PathBuf,
        #[source]
        source: qtsallis_core::error::Error,
    },
    #[error(transparent)]
    Core(#[from] qtsallis_core::error::Error),
    #[error("quadrature self-test error {0:e} exceeds 1e-9")]
    SelfTest(f64),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Parse { .. } | Self::InvalidState { .. } => 2,
            Self::Io { .. } => 3,
            Self::Core(_) | Self::SelfTest(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
