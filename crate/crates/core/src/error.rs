use thiserror::Error;

/// Errors raised by the kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An operation would produce a state above the model's degree cutoff.
    #[error("{op}: degree {degree} exceeds cutoff {cutoff}")]
    CutoffExceeded {
        op: &'static str,
        degree: usize,
        cutoff: usize,
    },
    #[error("structural error: {0}")]
    Structural(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rank is undefined for the zero state")]
    UndefinedRank,
    #[error("{identity} expects {expected} arguments, got {found}")]
    Arity {
        identity: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("search failed: {0}")]
    Search(String),
    #[error("witness error: {0}")]
    Witness(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
