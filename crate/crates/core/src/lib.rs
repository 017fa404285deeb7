//! Sparse (toric) elimination: mixed volumes via mixed subdivisions,
//! Sylvester-type sparse resultant matrices, and numerical root finding
//! through companion-matrix / matrix-pencil eigenproblems.

pub mod field;
pub mod lattice;
pub mod linalg;
pub mod lp;
pub mod numkernel;
pub mod polytope;
pub mod resultant;
pub mod solver;
pub mod subdivision;

/// Exact scalar used throughout the lattice-geometry layer.
pub type Rat = num_rational::BigRational;

pub use field::{Field, Scalar};
pub use lattice::{ExponentVector, RatPoly, SparsePolynomial, Support};
pub use polytope::Polytope;
pub use resultant::{Perturbation, ResultantMatrix, RowLabel};
pub use subdivision::{Cell, Lifting, MixedSubdivision};



use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero polynomial: all coefficients cancel")]
    ZeroPolynomial,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-generic lifting after {0} redraws")]
    NonGenericLifting(usize),
    #[error("non-generic delta after {0} redraws")]
    NonGenericDelta(usize),
    #[error("point has no vertex summand in its cell; re-lift")]
    NoVertexSummand,
    #[error("no Sylvester-type matrix found at this size bound")]
    SizeBoundExceeded,
    #[error("support mismatch between stored matrix definition and supplied system")]
    SupportMismatch,
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("eigendecomposition failed to converge")]
    EigenConvergence,
    #[error("support too large for exact face enumeration ({0} points)")]
    SupportTooLarge(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
