use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("protocol is not symmetric (max_asymmetry = {max_asymmetry:e})")]
    Asymmetric { max_asymmetry: f64 },

    #[error("protocol is not fully supported (min_rate = {min_rate:e}, floor = {floor:e})")]
    NotFullySupported { min_rate: f64, floor: f64 },

    #[error("integration diverged at step {step} (t = {time}): |x| exceeded 10 * mass")]
    IntegrationDiverged { step: usize, time: f64 },

    #[error("state grid too large: {size} states exceeds limit {limit}")]
    GridTooLarge { size: u128, limit: usize },

    #[error("chain is reducible: {} communicating classes found ({summary})", classes.len())]
    Reducible {
        classes: Vec<Vec<usize>>,
        summary: String,
    },

    #[error("stationary solver did not converge: {0}")]
    NotConverged(String),

    #[error("wrong arity: {0}")]
    WrongArity(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{}", .0.join("; "))]
    Aggregate(Vec<String>),
}
