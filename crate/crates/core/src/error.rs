use thiserror::Error;

use crate::logic::LogicError;
use crate::pmcs::Violation;

/// Errors raised by system construction and reasoning.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context `{context}`: {source}")]
    Logic {
        context: String,
        #[source]
        source: LogicError,
    },
    #[error("{what}: {found} exceeds the configured cap of {cap}")]
    Capacity {
        what: String,
        found: usize,
        cap: usize,
    },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("unknown bridge rule `{0}`")]
    UnknownRule(String),
    #[error("belief state has {found} entries, expected {expected}")]
    Alignment { expected: usize, found: usize },
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("strata do not partition the contexts: {0}")]
    Structural(String),
    #[error("bridge rules are not compatible with the stratification ({} violation(s))", .0.len())]
    Compatibility(Vec<Violation>),
    #[error("{0}")]
    Domain(String),
    #[error("cut consistency is not monotone: cut {consistent} is consistent but cut {inconsistent} is not")]
    Monotonicity {
        consistent: usize,
        inconsistent: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
