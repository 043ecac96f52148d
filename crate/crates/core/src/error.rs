use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("prefix too short: need {needed} symbols, got {got}")]
    PrefixTooShort { needed: usize, got: usize },
    #[error("tail bound is infinite at depth {0}")]
    TailUnbounded(usize),
    #[error("not a probability vector: {0}")]
    InvalidMeasure(String),
    #[error("tolerance {tol:e} not reachable within depth {cap}")]
    ToleranceUnreachable { tol: f64, cap: usize },
    #[error("oracle limits exceeded: {0}")]
    OracleLimits(String),
    #[error("oracle did not converge: spread {0:e}")]
    NoConvergence(f64),
    #[error("regime precondition failed: {0}")]
    Regime(String),
    #[error("run length exceeds cap {0}")]
    RunTooLong(usize),
    #[error("table of {0} cells is too large")]
    TooLarge(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
