//! Process exit codes: 0 ok, 2 usage or invalid input, 3 regime gate, 4 I/O.

use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Regime(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Regime(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(4),
            CliError::Internal(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Regime(msg) => write!(f, "regime error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub fn io_at(path: &std::path::Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |err| CliError::Io(format!("{}: {err}", path.display()))
}
