//! CLI error taxonomy mapped to exit codes: 0 ok, 2 usage, 3 input/schema,
//! 4 numeric failure.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// Unreadable or malformed inputs: missing files, parse errors, schema
    /// mismatches.
    Schema(String),
    /// The computation itself failed (non-finite data, untrainable model).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Schema(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: usage: {m}"),
            CliError::Schema(m) => write!(f, "error: schema: {m}"),
            CliError::Numeric(m) => write!(f, "error: numeric: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Schema(format!("io: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
