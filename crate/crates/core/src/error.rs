//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`].  Configuration problems are
//! reported eagerly at construction time so the simulation loops themselves
//! can stay panic-free.

use thiserror::Error;

/// Errors produced by configuration validation, signal operations, and
/// estimators.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or combination of parameters violates a documented
    /// constraint (e.g. the per-frame timing budget).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An argument is outside the domain of the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two signals that must share a sample grid do not.
    #[error("sample grids differ: {0}")]
    GridMismatch(String),

    /// A requested time or index falls outside the sampled extent.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Not enough measurements to run an estimator.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A linear system was singular or an iteration failed to converge.
    #[error("solver failure: {0}")]
    Solver(String),

    /// Error reading or writing experiment artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Error parsing a configuration file.
    #[error("config parse error: {0}")]
    ConfigParse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
