use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector {index} has norm {norm}, expected a unit vector")]
    NotUnit { index: usize, norm: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("Cholesky factorisation failed at pivot {pivot} (value {value:e})")]
    CholeskyFail { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot hash the zero vector")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("side lengths ({0}, {1}, {2}) do not form a spherical triangle")]
    DegenerateTriangle(f64, f64, f64),

    #[error("quadrature tolerance not met: estimate {estimate}, error estimate {error:e}, target {target:e}")]
    ToleranceNotMet { estimate: f64, error: f64, target: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}
