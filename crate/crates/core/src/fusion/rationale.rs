use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ce::{describe_fact, fact_clause, render_body, CeStatement, Clause};
use crate::kernel::{FactId, KnowledgeBase, Provenance};

use super::FusionError;

/// What a why-question is about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum Subject {
    Fact(FactId),
    Instance(String),
}

impl Subject {
    /// `f12` names a fact when it exists; anything else names an instance.
    pub fn resolve(kb: &KnowledgeBase, text: &str) -> Result<Subject, FusionError> {
        let text = text.trim();
        if let Ok(id) = text.parse::<FactId>() {
            if kb.fact(id).is_some() {
                return Ok(Subject::Fact(id));
            }
        }
        match kb.instance(text) {
            Some(inst) => Ok(Subject::Instance(inst.id.clone())),
            None => Err(FusionError::UnknownSubject(text.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationale {
    pub conclusion: Subject,
    /// Rule name for inferred conclusions.
    pub rule: Option<String>,
    pub premises: Vec<FactId>,
    /// `because ...` statement for inferred conclusions.
    pub statement: Option<CeStatement>,
    /// Rendered because-sentence.
    pub text: String,
}

/// The premises as a because-statement. The first mention of an instance
/// introduces it (`there is a person named p1 that is known as ...`), later
/// mentions refer back to it (`the person p1 ...`).
pub fn because(kb: &KnowledgeBase, premises: &[FactId]) -> CeStatement {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for id in premises {
        let Some(fact) = kb.fact(*id) else { continue };
        let key = fact.subject.to_lowercase();
        let stmt = match kb.instance(&fact.subject) {
            Some(inst) if seen.insert(key) => {
                let mut clauses = Vec::new();
                if let Some(label) = &inst.label {
                    clauses.push(Clause::KnownAs { label: label.clone() });
                }
                clauses.push(fact_clause(kb, fact));
                CeStatement::new_instance(&inst.concept, &inst.id, clauses)
            }
            _ => describe_fact(kb, fact),
        };
        out.push(stmt);
    }
    CeStatement::Because { premises: out }
}

fn told_text(what: &str, provenance: &Provenance) -> String {
    match provenance {
        Provenance::Told { source, timestamp, .. } => format!(
            "because {what} was reported by {source} at {}.",
            timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        ),
        Provenance::Inferred { rule, .. } => format!("because {what} was inferred by the rule '{rule}'."),
    }
}

fn from_provenance(kb: &KnowledgeBase, conclusion: Subject, what: String, provenance: &Provenance) -> Rationale {
    match provenance {
        Provenance::Inferred { rule, premises } => {
            let statement = because(kb, premises);
            let text = format!("{}.", render_body(&statement));
            Rationale {
                conclusion,
                rule: Some(rule.clone()),
                premises: premises.clone(),
                statement: Some(statement),
                text,
            }
        }
        told => Rationale {
            conclusion,
            rule: None,
            premises: Vec::new(),
            statement: None,
            text: told_text(&what, told),
        },
    }
}

/// Why a fact or instance is in the knowledge base.
pub fn rationale(kb: &KnowledgeBase, subject: &Subject) -> Result<Rationale, FusionError> {
    match subject {
        Subject::Fact(id) => {
            let fact = kb.fact(*id).ok_or_else(|| FusionError::UnknownSubject(id.to_string()))?;
            let what = render_body(&describe_fact(kb, fact));
            Ok(from_provenance(kb, subject.clone(), what, &fact.provenance))
        }
        Subject::Instance(i) => {
            let inst = kb.instance(i).ok_or_else(|| FusionError::UnknownSubject(i.clone()))?;
            let what = format!("the {} {}", inst.concept, crate::ce::render::token(&inst.id));
            Ok(from_provenance(kb, subject.clone(), what, &inst.origin))
        }
    }
}
