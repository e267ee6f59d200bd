use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants map onto the CLI exit codes: caller mistakes (`Input`, `Io`,
/// `Domain`) exit with 1, numeric and capability failures with 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("capability limit: {0}")]
    Capability(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Numeric(_) => "numeric",
            Error::Capability(_) => "capability",
            Error::Domain(_) => "domain",
            Error::Internal(_) => "internal",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Io { .. } | Error::Domain(_) => 1,
            Error::Numeric(_) | Error::Capability(_) | Error::Internal(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
