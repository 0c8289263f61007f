use thiserror::Error;

/// Errors produced by sequence construction, testing and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid event sequence: {0}")]
    InvalidEvents(String),

    #[error("invalid inter-arrival sequence: {0}")]
    InvalidInterArrivals(String),

    #[error("need at least {need} events, got {got}")]
    TooFewEvents { need: usize, got: usize },

    #[error("aging produced no samples at t_a = {t_a} ({n_discarded} windows discarded)")]
    EmptyAgedSample { t_a: f64, n_discarded: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("empty sample passed to {0}")]
    EmptySample(&'static str),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("all ages invalid: {0}")]
    AllAgesInvalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
