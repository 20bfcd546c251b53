//! Error type carrying the process exit code contract:
//! 2 config or usage, 3 evaluator failure, 4 protocol misuse.

use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Evaluator(String),
    Protocol(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Evaluator(_) => ExitCode::from(3),
            CliError::Protocol(_) => ExitCode::from(4),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Evaluator(msg) | CliError::Protocol(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl From<osfd_core::Error> for CliError {
    fn from(e: osfd_core::Error) -> Self {
        use osfd_core::Error;
        match e {
            Error::Protocol(msg) => CliError::Protocol(msg),
            Error::Evaluator(msg) => CliError::Evaluator(msg),
            Error::NonFinite(what) => CliError::Evaluator(format!("non-finite {what}")),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Config(format!("{context}: {e}"))
}
