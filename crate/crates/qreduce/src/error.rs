use qreduce_core::Error as CoreError;
use thiserror::Error;

/// Failures of a scenario run, each with a fixed process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical contract failed: {0}")]
    Numerical(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Cap(_) => 4,
        }
    }

    /// Core errors raised while building inputs: caps stay caps, the rest is bad configuration.
    pub fn from_input(e: CoreError) -> Self {
        match e {
            CoreError::EnumerationCap { .. } | CoreError::EnvironmentTooLarge { .. } => CliError::Cap(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::EnumerationCap { .. } | CoreError::EnvironmentTooLarge { .. } => CliError::Cap(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
