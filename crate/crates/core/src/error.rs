use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operator or superoperator dimensions do not fit together.
    #[error("dimension mismatch: {0}")]
    Structural(String),

    #[error("steady state is not unique (smallest relative pivot {pivot_ratio:.3e})")]
    NonUniqueSteadyState { pivot_ratio: f64 },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error("density matrix invalid: {0}")]
    InvalidDensityMatrix(String),

    #[error("integration failed: trace drifted by {drift:.3e} with step {dt:.3e} ns; try a smaller dt_max")]
    Integration { drift: f64, dt: f64 },

    #[error("scan failed at sample {index} (x = {x}): {source}")]
    ScanSample {
        index: usize,
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("ill-posed window: {0}")]
    IllPosedWindow(String),

    #[error("no signal: all intensities are zero")]
    NoSignal,

    #[error("rank deficient: {0}")]
    Rank(String),

    #[error("chaining error: {0}")]
    Chaining(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
