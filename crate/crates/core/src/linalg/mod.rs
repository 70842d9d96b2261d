//! Dense complex linear algebra: matrices, Kronecker products, Hermitian
//! eigendecomposition and spectral propagation.

mod eigen;
mod matrix;

pub use eigen::{hermitian_eigendecompose, unitary_evolve, EigenSystem, HERMITIAN_TOLERANCE};
pub use matrix::{inner, kron, max_abs_diff, norm, ComplexMatrix};
