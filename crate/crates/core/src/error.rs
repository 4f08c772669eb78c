//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Result`]. The variants are coarse on purpose:
//! callers mostly need to distinguish "the configuration or geometry was wrong"
//! (user error, CLI exit code 2) from "the computation itself went bad" (exit code 1),
//! and the message carries the specifics.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or combination. Messages name the offending key
    /// and the violated constraint.
    #[error("configuration error: {0}")]
    Config(String),

    /// Geometry that cannot be represented on the requested grid (ellipse leaving the
    /// domain, support touching an excluded boundary, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A kernel was evaluated at a genuinely singular configuration (coincident
    /// points with no regularization).
    #[error("singular kernel evaluation: {0}")]
    SingularEvaluation(String),

    /// A quantity violated a property it must have mathematically (positivity of the
    /// interaction kernel, finiteness of an integrand, ...). Usually indicates a bug
    /// or catastrophically bad input rather than an unlucky datum.
    #[error("numerical consistency failure: {0}")]
    Numerical(String),

    /// Input outside the mathematical domain of the operation (mean-free requirement,
    /// resolution too small after dealiasing, degenerate support, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A support query found no cells above threshold.
    #[error("empty support region: {0}")]
    EmptySupport(String),

    /// Snapshot or report file with inconsistent structure.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that indicate a bad run *request* (CLI exit code 2) rather
    /// than a failure while computing (exit code 1).
    pub fn is_user_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Geometry(_))
    }
}
