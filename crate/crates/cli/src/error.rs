use thiserror::Error;

/// Failure categories of a command, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Numerical(String),

    #[error("{0}")]
    Io(String),

    /// The experiment ran but at least one of its checks failed.
    #[error("checks failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<scalelab::Error> for CliError {
    fn from(e: scalelab::Error) -> Self {
        use scalelab::Error as E;
        match e {
            E::NumericalAbort { .. } | E::NonFinite(_) => CliError::Numerical(e.to_string()),
            E::Io(_) | E::Format(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
