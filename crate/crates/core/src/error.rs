//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GaussError>;

#[derive(Debug, Clone, Error)]
pub enum GaussError {
    /// Malformed input: wrong shape, non-symmetric data, out-of-range scalar.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A documented precondition of the operation does not hold for this
    /// input (for example a degenerate sharpness matrix where a density is
    /// requested).
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    /// The input is well-formed but falls in a branch the library does not
    /// implement (for example dilation of an observable whose twisted form
    /// is degenerate).
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    /// One-mode classification found invariants no valid channel can have.
    #[error("inconsistent channel: {0}")]
    InconsistentChannel(String),

    /// A mathematically guaranteed invariant failed numerically; indicates a
    /// bug or catastrophically conditioned input, never a property of a
    /// well-posed problem instance.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}
