use std::fmt;

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Parse { line: usize, message: String },
    Eval(String),
    Cert(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. } => 2,
            CliError::Eval(_) => 3,
            CliError::Cert(_) => 4,
        }
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse { line, message } => write!(f, "scene error at line {line}: {message}"),
            CliError::Eval(m) => write!(f, "evaluation error: {m}"),
            CliError::Cert(m) => write!(f, "certification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<padlab::Error> for CliError {
    fn from(e: padlab::Error) -> Self {
        match e {
            padlab::Error::Certification(m) => CliError::Cert(m),
            other => CliError::Eval(other.to_string()),
        }
    }
}
