use thiserror::Error;

/// Errors surfaced by the front end, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Feasibility(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Feasibility(_) => 3,
            CliError::Failure(_) => 1,
        }
    }

    pub(crate) fn key(key: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("invalid value for `{key}`: {msg}"))
    }
}

impl From<mera_core::Error> for CliError {
    fn from(e: mera_core::Error) -> Self {
        use mera_core::Error as E;
        if e.is_feasibility() {
            return CliError::Feasibility(e.to_string());
        }
        match e {
            E::Format(_) => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failure(format!("csv error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
