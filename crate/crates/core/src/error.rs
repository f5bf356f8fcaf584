use thiserror::Error;

use crate::channel::StationSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid configuration n={n}, d={d}: {reason}")]
    InvalidConfig { n: u32, d: u32, reason: String },

    #[error("live set {live} is not a size-{d} subset of 1..{n}")]
    InvalidLiveSet { live: StationSet, n: u32, d: u32 },

    #[error("strategy `{strategy}` queried {query}, which leaves 1..{n}")]
    InvalidQuery {
        strategy: String,
        query: StationSet,
        n: u32,
    },

    #[error("round cap {round_cap} reached before all live stations transmitted")]
    CapExceeded { round_cap: usize },

    #[error("{what} needs {needed}, over the limit of {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: String,
        limit: String,
    },

    #[error("adversary `{adversary}` answered {feedback} to {query}, leaving no consistent live set")]
    AdversaryInconsistent {
        adversary: String,
        query: StationSet,
        feedback: String,
    },

    #[error("feedback {feedback} to {query} is inconsistent with every candidate")]
    Inconsistent { query: StationSet, feedback: String },

    #[error("live sets {first} and {second} produce the same complete transcript")]
    AmbiguousLeaf {
        first: StationSet,
        second: StationSet,
    },

    #[error("{op}: {reason}")]
    DomainError { op: &'static str, reason: String },
}

impl Error {
    /// Stable variant name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidConfig { .. } => "InvalidConfig",
            Error::InvalidLiveSet { .. } => "InvalidLiveSet",
            Error::InvalidQuery { .. } => "InvalidQuery",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::AdversaryInconsistent { .. } => "AdversaryInconsistent",
            Error::Inconsistent { .. } => "Inconsistent",
            Error::AmbiguousLeaf { .. } => "AmbiguousLeaf",
            Error::DomainError { .. } => "DomainError",
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::DomainError {
            op,
            reason: reason.into(),
        }
    }
}
