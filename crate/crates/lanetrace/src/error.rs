//! Crate-wide error type.
//!
//! Library entry points return [`Error`] for conditions a caller can act on
//! (bad parameters, degenerate inputs, malformed files). Internal invariant
//! breaches use panics/debug assertions instead — those indicate bugs, not
//! caller mistakes.

use thiserror::Error;

/// Errors surfaced by the library's fallible entry points.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter was outside its documented range (e.g. a non-positive
    /// spacing, a threshold outside its open interval).
    #[error("invalid parameter {name}: {message}")]
    Parameter {
        /// Name of the offending parameter.
        name: &'static str,
        /// What was wrong with it.
        message: String,
    },

    /// Input data was structurally degenerate (e.g. an empty mask supplied to
    /// the distance transform, a polyline with fewer than two points).
    #[error("degenerate input: {0}")]
    Domain(String),

    /// A scene description cannot be realized; `index` points at the
    /// offending event in the scene's event list.
    #[error("infeasible scene event #{index}: {message}")]
    InfeasibleEvent {
        /// Index into the scene's event list.
        index: usize,
        /// Why the event cannot be realized.
        message: String,
    },

    /// A serialized artifact did not match the expected schema.
    #[error("malformed {what}: {message}")]
    Format {
        /// Which artifact kind failed to parse (e.g. "lane graph JSON").
        what: &'static str,
        /// Parser diagnostic.
        message: String,
    },

    /// An I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        /// File the operation touched.
        path: String,
        /// Underlying error.
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand for [`Error::Parameter`].
    pub fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter { name, message: message.into() }
    }

    /// Shorthand for [`Error::Domain`].
    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// Shorthand for [`Error::Io`].
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
