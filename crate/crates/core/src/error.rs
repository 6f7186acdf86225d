use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositive { eigenvalue: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("solver did not reach optimality: {0}")]
    Solver(String),

    #[error("size guard: Choi dimension {dim} exceeds limit {limit}")]
    SizeGuard { dim: usize, limit: usize },

    #[error("inconsistent results: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
