use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is not a probability in [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("{what} is not normalized (sum = {sum})")]
    NotNormalized { what: String, sum: f64 },

    #[error("{what} has an invalid entry {value}")]
    InvalidEntry { what: String, value: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("enumeration refused: {required} table entries required, budget is {budget}")]
    EnumerationRefused { required: u128, budget: u128 },

    #[error("horizon mismatch: {0}")]
    HorizonMismatch(String),

    #[error("internal inconsistency in {what}: {first} vs {second}")]
    Inconsistent {
        what: &'static str,
        first: f64,
        second: f64,
    },

    #[error("strategy undefined at step {step} for a positive-probability history")]
    UndefinedStrategy { step: usize },

    #[error("lookahead {requested} exceeds the budget of {max}")]
    LookaheadBudget { requested: usize, max: usize },

    #[error("Kraft inequality violated (sum = {0})")]
    KraftViolation(f64),

    #[error("infeasible market: {0}")]
    InfeasibleMarket(String),

    #[error("optimizer did not converge after {iterations} iterations (KKT residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("decode failed: {0}")]
    Decode(String),

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
