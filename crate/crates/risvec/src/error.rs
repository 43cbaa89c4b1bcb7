//! Error type and exit codes.

use std::io;
use std::path::PathBuf;

/// Failure classes of the toolkit, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or invalid configuration, override or trace content.
    #[error("config error: {0}")]
    Config(String),
    /// Filesystem or serialization failure.
    #[error("io error: {path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying failure.
        #[source]
        source: io::Error,
    },
    /// A numerical routine rejected its inputs.
    #[error("contract violation: {0}")]
    Contract(risvec_core::Error),
}

impl Error {
    /// Process exit code: 2 config, 3 I/O, 4 contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            Error::Contract(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, err: csv::Error) -> Self {
        let path = path.into();
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(source) => Error::Io { path, source },
                _ => unreachable!("is_io_error"),
            }
        } else {
            Error::Config(format!("{}: {err}", path.display()))
        }
    }
}

impl From<risvec_core::Error> for Error {
    fn from(e: risvec_core::Error) -> Self {
        match e {
            risvec_core::Error::Invalid { .. } => Error::Config(e.to_string()),
            other => Error::Contract(other),
        }
    }
}

/// Result alias.
pub type Result<T> = std::result::Result<T, Error>;
