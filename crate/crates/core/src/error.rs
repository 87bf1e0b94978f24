use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: non-square matrices, missing nodes, broken laminar structure.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An exact oracle was asked to solve an instance above its size cap.
    #[error("instance too large for exact mode: {n} > {limit}")]
    Size { n: usize, limit: usize },

    /// A property the algorithm guarantees did not hold.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("permit instance not in normal form: {0}")]
    NormalForm(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
