//! Reasoning over preferential multi-context systems.
//!
//! A multi-context system links heterogeneous knowledge bases ("contexts")
//! through bridge rules. A preferential system additionally orders its
//! contexts into strata, with information allowed to flow only from more to
//! equally or less preferred strata. This crate provides:
//!
//! * [`logic`]: propositional and answer-set logics behind a common interface;
//! * [`mcs`]: belief states, equilibria and bridge-rule modification;
//! * [`pmcs`]: strata, cuts and sections, stratified equilibria, the maximal
//!   consistent section and the degree of inconsistency;
//! * [`inconsistency`]: diagnoses, inconsistency explanations and their
//!   section-compatible variants, with a duality cross-check;
//! * [`dsl`]: the `.pmcs` text format;
//! * [`graph`]: information-flow graphs and DOT export;
//! * [`cli`]: the command-line front end used by the `pmcs` binary.
//!
//! ```
//! use pmcs::{dsl, pmcs::analyze, Config};
//!
//! let p = dsl::parse(
//!     "stratum { context a logic prop { kb { x. } br { } } }
//!      stratum { context b logic asp { kb { <- y. } br { r1: (2:y) <- (1:x). } } }",
//! )
//! .unwrap();
//! let report = analyze(&p, &Config::default()).unwrap();
//! assert_eq!((report.level, report.di.to_string()), (1, "1/2".to_string()));
//! ```

pub mod cli;
pub mod dsl;
pub mod error;
pub mod graph;
pub mod inconsistency;
pub mod logic;
pub mod mcs;
pub mod pmcs;
pub mod rule_id;

pub use error::{Error, Result};
pub use logic::{BeliefSet, KnowledgeBase, Literal, LogicKind, Signature};
pub use mcs::{BeliefState, BodyRef, BridgeRule, Context, McsSystem};
pub use pmcs::{PmcsSystem, SearchMode, StratifiedBeliefState};
pub use rule_id::RuleId;

/// Enumeration caps and execution settings shared by all reasoning entry
/// points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Maximum number of bridge rules in a system.
    pub max_rules: usize,
    /// Maximum number of atoms in any context signature.
    pub max_atoms: usize,
    /// Worker threads: `None` uses the global rayon pool, `Some(0)` runs
    /// sequentially.
    pub workers: Option<usize>,
    /// How the maximal consistent level is located.
    pub search: SearchMode,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_rules: 16,
            max_atoms: 16,
            workers: None,
            search: SearchMode::Binary,
        }
    }
}

impl Config {
    pub fn sequential() -> Self {
        Config {
            workers: Some(0),
            ..Config::default()
        }
    }
}
