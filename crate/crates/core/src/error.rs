use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("out-of-order event: trace expected step {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },

    #[error("trace for n={n} is incomplete ({steps} of {} merges)", n - 1)]
    IncompleteTrace { n: usize, steps: usize },

    #[error("{oracle} supports {min} <= n <= {max}, got n={n}")]
    OracleCap {
        oracle: &'static str,
        min: usize,
        max: usize,
        n: usize,
    },

    #[error("quadrature did not reach tolerance {tol:e} within {panels} panels (last change {last_change:e})")]
    QuadratureDiverged {
        tol: f64,
        panels: usize,
        last_change: f64,
    },

    #[error("{0} has no closed-form limit curve; use quadrature")]
    NoClosedForm(&'static str),

    #[error("chi-square pooling left {bins} bin(s); need at least 2")]
    DegeneratePooling { bins: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
