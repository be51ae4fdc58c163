use thiserror::Error;

/// CLI failures, split by exit code: validation problems exit with 2,
/// I/O and solver failures with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) | CliError::Convergence(_) => 1,
        }
    }
}

impl From<parity_opt::Error> for CliError {
    fn from(e: parity_opt::Error) -> Self {
        match e {
            parity_opt::Error::Io(inner) => CliError::Io(inner.to_string()),
            parity_opt::Error::NoConvergence { .. } => CliError::Convergence(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
