use thiserror::Error;

/// Coarse classification used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Inputs violate a documented precondition.
    Validation,
    /// A protocol has no solution for the requested parameters.
    Infeasible,
    /// A configured size cap was exceeded.
    NumericalCap,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M - M^H| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid spin quantum number {0}: 2s must be a non-negative integer")]
    InvalidSpin(f64),

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("Hilbert dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operator does not commute with total S_z: residual {0:e}")]
    SymmetryBroken(f64),

    #[error("ground multiplet is not an S_z = +-1/2 doublet: {0}")]
    InvalidDoublet(String),

    #[error("anisotropy diverges: transverse sum {denominator:e} is below {threshold:e}")]
    AnisotropyDivergence { denominator: f64, threshold: f64 },

    #[error("constraint gamma_i (1 + delta_i) = C violated by {deviation:e}")]
    ConstraintViolated { deviation: f64 },

    #[error("network has no transverse coupling (Omega = 0)")]
    ZeroCoupling,

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("protocol infeasible: {0}")]
    Infeasible(String),

    #[error("population leaked out of the single-excitation sector: {0:e}")]
    SubspaceLeakage(f64),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::DimensionCap { .. } => ErrorCategory::NumericalCap,
            Error::Infeasible(_) | Error::AnisotropyDivergence { .. } | Error::InvalidDoublet(_) => {
                ErrorCategory::Infeasible
            }
            _ => ErrorCategory::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
