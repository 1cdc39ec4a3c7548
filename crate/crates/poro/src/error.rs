use std::path::PathBuf;

use crate::config::ConfigError;

/// Errors surfaced by the driver. `exit_code` maps them to the process status.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: poro_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn core(context: impl Into<String>, source: poro_core::Error) -> Self {
        AppError::Core {
            context: context.into(),
            source,
        }
    }

    /// 1 for anything wrong with the inputs, 2 when a run fails.
    pub fn exit_code(&self) -> i32 {
        use poro_core::Error as E;
        match self {
            AppError::Config(_) | AppError::Input(_) => 1,
            AppError::Core { source, .. } => match source {
                E::SingularSystem(_) | E::SolverDiverged { .. } | E::MissingTime(_) => 2,
                _ => 1,
            },
            AppError::Io { .. } => 2,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
