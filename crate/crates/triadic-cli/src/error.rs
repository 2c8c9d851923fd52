//! CLI-level errors and their exit codes: 1 for I/O and parse failures,
//! 2 for precondition violations, 3 for internal invariant breaches.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
    Config(String),
    /// Non-complementary input rows, reported 1-based.
    NonComplementary { rows: Vec<usize> },
    Domain(triadic::Error),
}

impl CliError {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse { .. } => 1,
            CliError::Config(_) | CliError::NonComplementary { .. } => 2,
            CliError::Domain(e) => match e {
                triadic::Error::InternalInconsistency { .. } => 3,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Parse { line, message } => {
                write!(f, "parse error at line {line}: {message}")
            }
            CliError::Config(message) => write!(f, "invalid configuration: {message}"),
            CliError::NonComplementary { rows } => {
                let rows = rows
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                write!(
                    f,
                    "rows {rows} are not complementary (p_h + p_k != 1); \
                     pass --allow-noncomplementary to classify them anyway"
                )
            }
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<triadic::Error> for CliError {
    fn from(e: triadic::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
