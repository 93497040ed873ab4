use std::fmt;

/// Failure classes, each with a fixed process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn config(path: &str, msg: impl fmt::Display) -> Self {
        CliError::Config(format!("{path}: {msg}"))
    }
}

impl From<odm::Error> for CliError {
    fn from(e: odm::Error) -> Self {
        use odm::Error as E;
        match e {
            E::InvalidParams(_) | E::InvalidArgument(_) => CliError::Config(e.to_string()),
            E::Data(m) => CliError::Data(m),
            E::Io(_) | E::Csv(_) | E::Json(_) => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
