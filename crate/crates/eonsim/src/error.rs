//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Topology files failed to parse or describe an invalid graph.
    #[error("topology: {0}")]
    Topology(String),
    /// A partition plan could not be built from the given slot budget.
    #[error("partition plan: {0}")]
    Plan(String),
    /// An occupancy operation violated the store's invariants. This is a bug
    /// in the caller, never a recoverable condition.
    #[error("occupancy: {0}")]
    Occupancy(String),
    /// A realization computation was asked for an undefined quantity.
    #[error("realization: {0}")]
    Realization(String),
    /// A scenario file failed validation.
    #[error("scenario: {0}")]
    Scenario(String),
    /// A stream replay file failed to parse.
    #[error("stream: {0}")]
    Stream(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
