use thiserror::Error;

/// Failures of the command layer, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, assumption violations.
    #[error("{0}")]
    Validation(String),

    /// Numerical breakdown or a failed simulation worker.
    #[error("{0}")]
    Numerical(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Output { .. } => 3,
        }
    }
}

impl From<hetci::Error> for CliError {
    fn from(e: hetci::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
