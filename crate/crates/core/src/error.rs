use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("lamp groups differ between operands")]
    LampGroupMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge: {panels} vs {doubled} panels differ by {delta:e}")]
    NonConvergence {
        panels: usize,
        doubled: usize,
        delta: f64,
    },
    #[error("chain is not reversible: |pi_i a_ij - pi_j a_ji| = {defect:e} at ({i}, {j})")]
    NotReversible { i: usize, j: usize, defect: f64 },
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
