use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: usize, found: usize },

    #[error("partition height {height} exceeds the limit {limit}")]
    HeightExceeded { height: usize, limit: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("{mu} is not reachable from {alpha} by adding {k} boxes")]
    Unreachable { alpha: String, mu: String, k: usize },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Perron vector component {index} is not positive ({value:e})")]
    NonPositiveEigenvector { index: usize, value: f64 },

    #[error("internal relation violated: {0}")]
    RelationViolated(String),

    #[error("operator dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid index tuple: {0}")]
    InvalidIndex(String),

    #[error("eigenvalue grouping failed: {0}")]
    EigenGrouping(String),

    #[error("basis extraction failed: {0}")]
    BasisExtraction(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
