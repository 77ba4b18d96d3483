use thiserror::Error;

/// Errors raised by the solver modules and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, geometry or configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A numerical routine failed (eigensolve, root bracketing, quadrature).
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code used by the CLI: 1 for configuration and validation
    /// problems, 2 for numerical or output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) => 1,
            Error::Numerical(_) | Error::Io(_) => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
