use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot read or write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] multiproj_core::Error),

    #[error("{failed} of {trials} trials failed (first: trial {first_trial}: {first_message})")]
    TooManyFailures {
        failed: usize,
        trials: u64,
        first_trial: u64,
        first_message: String,
    },

    #[error("worker pool: {0}")]
    Pool(String),

    #[error("unknown acceptance criterion {0}")]
    UnknownCriterion(u8),
}

impl HarnessError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for everything
    /// that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::UnknownCriterion(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
