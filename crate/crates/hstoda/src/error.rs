//! Error type shared across the library.

use thiserror::Error;

/// Library-wide error enumeration.
#[derive(Debug, Error)]
pub enum Error {
    /// A deformation sequence entry violates |a_i| <= 1 or N < 2.
    #[error("invalid deformation sequence: {0}")]
    InvalidSequence(String),
    /// An operator or state had the wrong shape for the requested operation.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// An index was outside the valid triangular range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    /// A pair of sequences does not admit a Poisson pencil.
    #[error("sequences do not form a valid pencil: witness indices ({i}, {j})")]
    InvalidPencil { i: usize, j: usize },
    /// A matrix that must be invertible was singular.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    /// The adaptive integrator could not reach the requested accuracy.
    #[error("integration failure at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },
    /// A closed-form solution hit a degenerate parameter configuration.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    /// A denominator in an angle equation fell below the safe threshold.
    #[error("singular configuration at t = {t}: {reason}")]
    SingularConfiguration { t: f64, reason: String },
    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),
    /// Filesystem or serialization problem while writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization problem.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
