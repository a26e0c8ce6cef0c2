use thiserror::Error;

/// Errors surfaced by parsing, resource limits and internal consistency checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: undeclared {kind} `{name}`")]
    Undeclared {
        line: usize,
        kind: &'static str,
        name: String,
    },
    #[error("{0}")]
    Input(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("internal defect: {0}")]
    Defect(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            Error::Syntax {
                column, message, ..
            } => Error::Syntax {
                line,
                column,
                message,
            },
            Error::Undeclared { kind, name, .. } => Error::Undeclared { line, kind, name },
            other => other,
        }
    }
}
