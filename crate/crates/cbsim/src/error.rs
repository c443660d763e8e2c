//! Error types shared across the crate.

use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Sequence lengths do not line up (e.g. chips vs. code length).
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A configuration key is unknown or carries an unusable value.
    /// Carries the offending key so the CLI can name it on exit code 2.
    #[error("config error at key `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// Malformed input file (layout CSV, manifest, ...).
    #[error("parse error in {what}: {reason}")]
    Parse { what: String, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors that should map to CLI exit code 2 (bad usage or
    /// configuration) rather than 1 (runtime failure).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Config { .. })
    }
}
