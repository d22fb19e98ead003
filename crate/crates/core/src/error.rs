use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed history: {0}")]
    MalformedHistory(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("budget exhausted: round {t} of {horizon}")]
    BudgetExhausted { t: usize, horizon: usize },

    #[error("posterior of arm {arm} is undefined: no observations under the flat prior")]
    UndefinedPosterior { arm: usize },

    #[error("cannot recommend: arm {arm} has no observations under the flat prior")]
    UndefinedRecommendation { arm: usize },

    #[error("arm {arm} out of range 1..={arms}")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error(
        "exact recursion capacity exceeded: {reason}; use the Monte-Carlo oracle \
         or the two-armed fast path instead"
    )]
    Capacity { reason: String },

    #[error("{policy} supports only {supported} arms, got {arms}")]
    UnsupportedArity {
        policy: String,
        supported: usize,
        arms: usize,
    },

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error(
        "numerical integration did not converge on [{lower}, {upper}]: \
         estimated error {error:e} after {evaluations} evaluations"
    )]
    Integration {
        lower: f64,
        upper: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
