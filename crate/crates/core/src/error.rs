use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("generators {0} and {1} do not commute")]
    NotAbelian(usize, usize),
    #[error("generator {0} is not invertible")]
    NotInvertible(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("not representable exactly: {0}")]
    NotRepresentable(String),
    #[error("matrix is not in the block triangular cone: {0}")]
    Membership(String),
    #[error("matrix does not have the required block shape: {0}")]
    Shape(String),
    #[error("index {index} out of range 1..={len}")]
    OutOfRange { index: usize, len: usize },
    #[error("diagonal entry {0} is not an integer multiple of 2πi")]
    Branch(String),
    #[error("witness {index} does not exponentiate to its generator (max relative deviation {deviation:.3e})")]
    WitnessMismatch { index: usize, deviation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
