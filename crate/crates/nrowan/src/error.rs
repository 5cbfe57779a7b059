//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension mismatch between tensors, layers, or networks.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Operation called in an invalid order (e.g. backward before forward,
    /// stepping a terminal environment).
    #[error("invalid state: {0}")]
    State(String),

    /// A computation produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A resource is not ready yet (underfull replay buffer, missing run data).
    #[error("not ready: {0}")]
    NotReady(String),

    /// Invalid configuration; the message names the offending field.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
