use thiserror::Error;

/// Errors raised by the estimation, simulation and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("symmetric eigensolver did not converge for a {dim}x{dim} matrix after {sweeps} sweeps")]
    EigenNoConvergence { dim: usize, sweeps: usize },

    #[error("enumeration guard exceeded: C({d}, {s}) = {count} subsets > limit {limit}; lower s or d")]
    EnumerationGuard {
        d: usize,
        s: usize,
        count: u128,
        limit: u128,
    },

    #[error("eigengap {gap:e} between eigenvalues {k} and {next} is below {threshold:e}")]
    DegenerateEigengap {
        k: usize,
        next: usize,
        gap: f64,
        threshold: f64,
    },

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid correlation model: {0}")]
    InvalidModel(String),

    #[error("tied values in column {column}")]
    Ties { column: usize },

    #[error("need at least {required} observations, got {got}")]
    TooFewObservations { required: usize, got: usize },

    #[error("correlation {rho} too close to +-1; use the degenerate limits min(Phi(x), Phi(y)) or max(0, Phi(x) + Phi(y) - 1)")]
    DegenerateCorrelation { rho: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureNoConvergence { tol: f64, estimate: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
