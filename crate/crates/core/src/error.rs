use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter outside admissible domain: {0}")]
    Domain(String),

    #[error(
        "product budget exceeded at depth {depth}: {required} products requested, budget {budget}"
    )]
    BudgetExceeded {
        depth: usize,
        required: u128,
        budget: u64,
    },

    #[error("iteration did not converge after {iterations} steps")]
    Unconverged { iterations: usize },
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidInput(_) => "invalid_input",
            Error::Domain(_) => "domain",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Unconverged { .. } => "unconverged",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
