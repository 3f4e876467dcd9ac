use std::path::PathBuf;

use stark_qed_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 0 success, 1 validation error, 2 invariant violation, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 1,
            RunError::Core(e) => match e {
                CoreError::Invariant(_) | CoreError::Sizing { .. } => 2,
                _ => 1,
            },
            RunError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }
}

pub type RunResult<T> = Result<T, RunError>;
