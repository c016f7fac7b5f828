use serde::{Deserialize, Serialize};

use crate::kernel::{PropertyRange, PropertyStyle, SynonymTarget};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClauseValue {
    Literal { text: String },
    Instance { concept: String, id: String },
}

impl ClauseValue {
    pub fn literal(text: &str) -> Self {
        ClauseValue::Literal { text: text.to_string() }
    }

    pub fn instance(concept: &str, id: &str) -> Self {
        ClauseValue::Instance {
            concept: concept.to_string(),
            id: id.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Clause {
    Property {
        name: String,
        style: PropertyStyle,
        value: ClauseValue,
    },
    IsA {
        concept: String,
    },
    KnownAs {
        label: String,
    },
}

impl Clause {
    pub fn has(name: &str, value: ClauseValue) -> Self {
        Clause::Property {
            name: name.to_string(),
            style: PropertyStyle::Has,
            value,
        }
    }

    pub fn verb(name: &str, value: ClauseValue) -> Self {
        Clause::Property {
            name: name.to_string(),
            style: PropertyStyle::Verb,
            value,
        }
    }

    pub fn is_a(concept: &str) -> Self {
        Clause::IsA {
            concept: concept.to_string(),
        }
    }
}

/// A ground CE sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CeStatement {
    /// `there is a <concept> named <id> that ...`
    NewInstance {
        concept: String,
        id: String,
        clauses: Vec<Clause>,
    },
    /// `the <concept> <id> ...`
    InstanceFacts {
        concept: String,
        id: String,
        clauses: Vec<Clause>,
    },
    /// `because <statement> and <statement> ...`
    Because { premises: Vec<CeStatement> },
}

impl CeStatement {
    pub fn new_instance(concept: &str, id: &str, clauses: Vec<Clause>) -> Self {
        CeStatement::NewInstance {
            concept: concept.to_string(),
            id: id.to_string(),
            clauses,
        }
    }

    pub fn instance_facts(concept: &str, id: &str, clauses: Vec<Clause>) -> Self {
        CeStatement::InstanceFacts {
            concept: concept.to_string(),
            id: id.to_string(),
            clauses,
        }
    }

    /// Subject `(concept, id)` for instance statements.
    pub fn subject(&self) -> Option<(&str, &str)> {
        match self {
            CeStatement::NewInstance { concept, id, .. }
            | CeStatement::InstanceFacts { concept, id, .. } => Some((concept, id)),
            CeStatement::Because { .. } => None,
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        match self {
            CeStatement::NewInstance { clauses, .. } | CeStatement::InstanceFacts { clauses, .. } => clauses,
            CeStatement::Because { .. } => &[],
        }
    }

    pub fn clauses_mut(&mut self) -> Option<&mut Vec<Clause>> {
        match self {
            CeStatement::NewInstance { clauses, .. } | CeStatement::InstanceFacts { clauses, .. } => {
                Some(clauses)
            }
            CeStatement::Because { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDecl {
    pub name: String,
    pub range: PropertyRange,
    pub style: PropertyStyle,
}

/// A model declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CeModelDecl {
    Conceptualise {
        name: String,
        parents: Vec<String>,
        properties: Vec<PropertyDecl>,
    },
    SynonymDecl {
        target: SynonymTarget,
        surfaces: Vec<String>,
    },
    StaticInstance {
        concept: String,
        id: String,
    },
}

/// One period-terminated sentence of a CE document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CeSentence {
    Model(CeModelDecl),
    Statement(CeStatement),
}

/// A sentence together with the line it started on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located<T> {
    pub line: usize,
    pub item: T,
}
