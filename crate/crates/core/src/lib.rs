//! Exact symbolic computation for free-boson vertex operator algebras.
//!
//! Everything is rational and truncated at an explicit degree cutoff:
//! operations that would leave the truncated space fail with
//! [`Error::CutoffExceeded`] instead of silently dropping terms.

pub mod diffcomm;
pub mod error;
pub mod fock;
pub mod ideals;
pub mod lifilt;
pub mod linalg;
pub mod orbifold;
pub mod par;
pub mod products;
pub mod recovery;
pub mod sweep;

pub use error::{Error, Result};
pub use fock::{Factor, FockMonomial, FockState, LambdaPoly, Model, ModelSpec};
pub use linalg::{GradedFamily, Scalar, SparseVec, Subspace};
pub use par::Strategy;
pub use products::{IdentityName, IdentityReport, ProductMode};
