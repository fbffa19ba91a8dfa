//! Dense complex linear algebra, quadrature and random streams.

pub mod eigen;
pub mod kronrod;
pub mod matrix;
pub mod quadrature;
pub mod random;
pub mod scalar;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use kronrod::{integrate_adaptive, KronrodOptions, KronrodResult};
pub use matrix::{CMatrix, Mat, MatrixJson};
pub use quadrature::{quadrature_nodes, QuadratureKind, QuadratureRule};
pub use random::{haar_unitary, RandomStream};
pub use scalar::{Cplx, Field, Rational};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("matrix of shape {0:?} is not square")]
    NotSquare((usize, usize)),
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian")]
    NotHermitian,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QuadratureError {
    #[error("unsupported node count {0} (must be 1..=512)")]
    UnsupportedCount(usize),
    #[error("weight parameters out of range: {0:?}")]
    InvalidWeight(QuadratureKind),
}
