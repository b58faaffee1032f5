use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A solver hit a non-positive value, failed to converge or ran out of steps.
    #[error("solver: {0}")]
    Solver(String),

    /// The two-sided eigenfunction bound could not be established on the grid.
    #[error("bound check: {0}")]
    Bound(String),

    /// A lifespan iteration produced a non-positive denominator.
    #[error("iteration: {0}")]
    Iteration(String),

    /// One or more runs in a sweep did not blow up.
    #[error("sweep: no blow-up for eps = {eps:?}")]
    Sweep { eps: Vec<f64> },

    /// Inconsistent simulation configuration (CFL, grid coverage, ...).
    #[error("configuration: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
