use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A call violates an operation's preconditions or a theorem's hypotheses.
    #[error("usage error: {0}")]
    Usage(String),

    /// Bound states did not settle under margin refinement.
    #[error(
        "bound states failed to stabilize up to margin {margin}: previous {previous:?}, last {last:?}"
    )]
    Unstable {
        margin: usize,
        previous: Vec<f64>,
        last: Vec<f64>,
    },

    /// Gram-Schmidt met a vector (nearly) in the span of its predecessors.
    #[error("rank deficiency at vector index {index} (residual norm {residual:e})")]
    RankDeficient { index: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
