use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    /// A well-formed input violating a mathematical precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configured search or enumeration bound was exceeded.
    #[error("size limit exceeded: {0}")]
    Size(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the shape of the input rather than its mathematics.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Parse { .. })
    }
}
