//! Simulation of star-coupled antiferromagnetic molecular-ring qubits.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, Hermitian
//!   eigendecomposition and spectral propagation.
//! - [`ring`]: microscopic spin Hamiltonian of a Cr<sub>x</sub>Ni ring and
//!   extraction of its ground-doublet qubit encoding.
//! - [`coupling`]: effective qubit-qubit coupling `gamma` and anisotropy
//!   `delta` induced by selective linkers, plus parameter sweeps.
//! - [`star`]: the single-excitation star Hamiltonian, its closed-form
//!   eigensystem and propagators.
//! - [`protocols`]: W-state generation and perfect state transfer.
//! - [`oracle`]: brute-force full-Hilbert-space checks of the layers above.
//!
//! Site indices are zero-based throughout the API; the central ring of a
//! network with `n` circumjacent rings sits at index `n`.

pub mod coupling;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod protocols;
pub mod ring;
pub mod star;

pub use error::{Error, ErrorCategory, Result};
