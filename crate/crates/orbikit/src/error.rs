use thiserror::Error;

/// Errors shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the supported range (e.g. `p < q` or `q = 0`).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// Structurally valid input that violates a precondition (bad cell index,
    /// negative entry, row sum above one, non-vertex where one is required…).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An enumeration would exceed the configured size cap.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    /// The linear program has no feasible point.
    #[error("linear program is infeasible")]
    Infeasible,
    /// The linear program is unbounded in the optimization direction.
    #[error("linear program is unbounded")]
    Unbounded,
    /// Malformed textual input (JSON, LP files, rationals).
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
