use thiserror::Error;

/// Errors raised by the construction, oracle and verification routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TribesError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to parse decimal {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("truth table needs {needed} variables but the cap is {cap}")]
    CapacityExceeded { needed: usize, cap: usize },

    /// The product over all tribes stays above `1 - mu`.
    #[error("target expectation {mu} is not reachable with {tribes} tribes")]
    MuNotAchievable { mu: String, tribes: usize },

    /// No tribe fits the budgets (`m = 0`).
    #[error("budgets admit no tribe, construction is infeasible")]
    ConstructionInfeasible,

    #[error("function is constant (variance 0)")]
    ConstantFunction,

    #[error("verification failed on {quantity}: analytic {analytic}, oracle {oracle}")]
    VerificationFailure {
        quantity: String,
        analytic: String,
        oracle: String,
    },
}

pub type Result<T, E = TribesError> = std::result::Result<T, E>;
