use hyperwalk_core::WalkError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration or parameter values.
    #[error("{0}")]
    Usage(String),

    /// The integrator stopped on a trace, positivity or range violation.
    #[error("{0}")]
    Integrator(String),

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Integrator(_) => 3,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }
}

impl From<WalkError> for CliError {
    fn from(err: WalkError) -> Self {
        let message = err.to_string();
        match err {
            WalkError::IntegratorAbort { .. }
            | WalkError::NegativeEigenvalue(_)
            | WalkError::NonRealDiagonal { .. } => CliError::Integrator(message),
            WalkError::Eigen | WalkError::Io(_) => CliError::Runtime(message),
            _ => CliError::Usage(message),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
