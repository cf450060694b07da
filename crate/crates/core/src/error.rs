use thiserror::Error;

/// Errors produced by the k-circulant machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate k-circulant: k = {k} is 0 mod n = {n}")]
    DegenerateK { k: u64, n: u64 },

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(u64),

    #[error("input sequence has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("input sequence contains a non-finite value at index {0}")]
    NonFiniteInput(usize),

    #[error("k = {k} and n = {n} are not coprime")]
    NotCoprime { k: u64, n: u64 },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("multisets have different cardinality ({0} vs {1})")]
    CardinalityMismatch(usize, usize),

    #[error("quadrature did not converge: estimated error {achieved:e} exceeds {target:e}")]
    Quadrature { achieved: f64, target: f64 },

    #[error("QR iteration failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("probe point {0} is numerically an eigenvalue")]
    SingularProbe(num_complex::Complex64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("empty sample")]
    EmptySample,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
