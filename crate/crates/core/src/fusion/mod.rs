//! Forward-chaining fusion of reports into derived knowledge.
//!
//! Rules are read from a small block format (see [`parse_rules`]) and run to
//! a fixpoint by [`run_rules`]. Everything derived carries the rule name and
//! the premise facts, so [`rationale`] can explain it as a `because` sentence.

mod engine;
mod rationale;
mod rules;
mod subscribe;

use thiserror::Error;

use crate::kernel::KernelError;

pub use engine::{apply_production, audit, matches, ordered, production_value, run_rules, Binding, Derived, Match, RunReport, MAX_ROUNDS};
pub use rationale::{because, rationale, Rationale, Subject};
pub use rules::{parse_rules, Pattern, PatternKind, Rule, Term};
pub use subscribe::{Delivery, Subscription, Subscriptions};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("rules line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule '{rule}': {message}")]
    InvalidRule { rule: String, message: String },
    #[error("rule '{rule}' could not produce '{production}': {source}")]
    Production {
        rule: String,
        production: String,
        #[source]
        source: KernelError,
    },
    #[error("no fixpoint after {rounds} rounds")]
    NoFixpoint { rounds: usize },
    #[error("nothing called '{0}' is known")]
    UnknownSubject(String),
}
