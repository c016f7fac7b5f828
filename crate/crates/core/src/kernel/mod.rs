//! CE domain types and the knowledge base.

mod kb;
mod lexicon;
mod model;

pub use kb::{
    id_prefix, Claim, Fact, FactId, FactPattern, Instance, KnowledgeBase, PropertySelector, Provenance, Value,
};
pub use lexicon::{normalize_word, Element, LexEntry, Lexicon, MatchVia};
pub use model::{
    fold, CeModel, Concept, PropertyDef, PropertyId, PropertyKind, PropertyRange, PropertyStyle,
    Synonym, SynonymTarget,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("empty name")]
    EmptyName,
    #[error("unknown concept '{0}'")]
    UnknownConcept(String),
    #[error("concept '{0}' redeclared with different parents")]
    ConflictingConcept(String),
    #[error("concept hierarchy cycle through '{0}'")]
    Cycle(String),
    #[error("malformed property identity '{0}' (expected domain:name:range)")]
    MalformedPropertyId(String),
    #[error("unknown property '{0}'")]
    UnknownProperty(String),
    #[error("unknown instance '{0}'")]
    UnknownInstance(String),
    #[error("instance '{id}' already exists as a {existing}, not a {requested}")]
    InstanceConflict {
        id: String,
        existing: String,
        requested: String,
    },
    #[error("property '{property}' does not apply to '{subject}' (domain violation)")]
    DomainViolation { property: String, subject: String },
    #[error("property '{property}' cannot take '{value}' (range violation)")]
    RangeViolation { property: String, value: String },
    #[error("premise {0} does not exist")]
    MissingPremise(FactId),
    #[error("synonym surface is empty")]
    EmptySurface,
}
