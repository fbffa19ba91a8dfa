//! The Jordan group as units of `Mat(r)[w]/(w^p)`, its logarithm, and `θ_k`.

pub mod ncpoly;
pub mod theta;
pub mod trunc;

pub use ncpoly::{NCPolynomial, Word};
pub use theta::{theta, theta_symbolic, theta_traces};
pub use trunc::{CTruncPoly, TruncPoly};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum JordanError {
    #[error("shape mismatch: expected (r, p) = {expected:?}, found {found:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("truncated polynomial needs at least one square coefficient")]
    EmptyPolynomial,
    #[error("leading coefficient is not invertible")]
    NotAUnit,
    #[error("leading coefficient is not the identity")]
    NotUnipotent,
    #[error("leading coefficient is not zero")]
    NotNilpotent,
    #[error("θ needs p >= 2, got {0}")]
    InvalidDegree(usize),
}
