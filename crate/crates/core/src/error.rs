use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown token {found:?} at byte {offset}")]
    UnknownToken { offset: usize, found: char },

    #[error("atom `{0}` is not assigned in the valuation")]
    UnboundAtom(String),

    #[error("malformed dataset document: {0}")]
    Schema(String),

    #[error("sequence `{id}` has {found} steps, expected {expected}")]
    RaggedHorizon {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("sequence `{id}` step {step}: atom `{atom}` is unassigned")]
    IncompleteValuation {
        id: String,
        step: usize,
        atom: String,
    },

    #[error("{what} {index} is out of range 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("condition has no evidence and mu = 1 divides by zero; use limit mode")]
    UnfoundedConditionAtMuOne,

    #[error("condition has zero probability under mu = {0}")]
    ZeroProbabilityCondition(f64),

    #[error("condition is unfounded: no datum satisfies any of its items")]
    UnfoundedCondition,

    #[error("mu must lie in [0, 1], got {0}")]
    InvalidMu(f64),

    #[error("{0}")]
    CapExceeded(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Whether the error originates from the dataset rather than from a query.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::RaggedHorizon { .. }
                | Error::UnknownAtom(_)
                | Error::IncompleteValuation { .. }
        )
    }
}
