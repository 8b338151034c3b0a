use thiserror::Error;

/// Errors surfaced by the numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters violate a standing assumption (e.g. gamma outside the
    /// admissible strip, p < 1, alpha <= -1).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A series or iteration could not reach the requested tolerance
    /// within its budget; the achievable bound is reported.
    #[error("accuracy not reachable: {0}")]
    Accuracy(String),

    /// A fractional-difference tail cannot be certified below the tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Series truncation could not be certified below the tail tolerance.
    #[error("truncation failure: {0}")]
    Truncation(String),

    /// An eigenvalue iteration or quadrature construction failed.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// A tail bound of a weighted integral cannot be forced below tolerance.
    #[error("tail-bound failure: {0}")]
    TailBound(String),

    /// An integral diverges (reported, never silently clipped).
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// Serialization / report I/O problems.
    #[error("report error: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;
