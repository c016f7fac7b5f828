//! Loading CE documents into a knowledge base.
//!
//! Statements are upserts: `there is a C named X` on an existing `X` adds the
//! missing type instead of failing, which is how a single instance picks up
//! both `vehicle` and `moving thing`. Every entry point is atomic — on error
//! the knowledge base is left exactly as it was.

use thiserror::Error;

use crate::kernel::{
    fold, Claim, Concept, FactId, KernelError, KnowledgeBase, PropertyDef, PropertyId, PropertyRange,
    PropertyStyle, Provenance, Value,
};

use super::ast::{CeModelDecl, CeSentence, CeStatement, Clause, ClauseValue};
use super::parser::{split_sentences, CeParser};
use super::CeError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Syntax(#[from] CeError),
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: KernelError,
    },
}

/// What a load added.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LoadSummary {
    pub concepts: usize,
    pub properties: usize,
    pub synonyms: usize,
    /// Instances created, in creation order.
    pub instances: Vec<String>,
    /// Facts asserted or re-asserted, in statement order.
    pub facts: Vec<FactId>,
}

impl LoadSummary {
    fn absorb(&mut self, other: LoadSummary) {
        self.concepts += other.concepts;
        self.properties += other.properties;
        self.synonyms += other.synonyms;
        self.instances.extend(other.instances);
        self.facts.extend(other.facts);
    }
}

/// Applies one batch of model declarations. Concepts may reference each
/// other in any order within the batch.
pub fn load_model(
    kb: &mut KnowledgeBase,
    decls: &[CeModelDecl],
    origin: &Provenance,
) -> Result<LoadSummary, KernelError> {
    let mut work = kb.clone();
    let summary = apply_model(&mut work, decls, origin)?;
    *kb = work;
    Ok(summary)
}

fn apply_model(
    kb: &mut KnowledgeBase,
    decls: &[CeModelDecl],
    origin: &Provenance,
) -> Result<LoadSummary, KernelError> {
    let mut summary = LoadSummary::default();
    let mut concepts = Vec::new();
    for d in decls {
        if let CeModelDecl::Conceptualise { name, parents, .. } = d {
            let mut c = Concept::new(name);
            for p in parents {
                c = c.with_parent(p);
            }
            concepts.push(c);
        }
    }
    summary.concepts = concepts.len();
    if !concepts.is_empty() {
        kb.add_concepts(concepts)?;
    }
    for d in decls {
        if let CeModelDecl::Conceptualise { name, properties, .. } = d {
            for p in properties {
                let id = PropertyId::new(name, &p.name, p.range.clone());
                kb.add_property(PropertyDef { id, style: p.style })?;
                summary.properties += 1;
            }
        }
    }
    for d in decls {
        if let CeModelDecl::StaticInstance { concept, id } = d {
            if kb.declare_instance(id, concept, origin.clone())? {
                summary.instances.push(id.clone());
            }
        }
    }
    for d in decls {
        if let CeModelDecl::SynonymDecl { target, surfaces } = d {
            for s in surfaces {
                kb.add_synonym(s, target.clone())?;
                summary.synonyms += 1;
            }
        }
    }
    Ok(summary)
}

/// Parses and loads a mixed document of declarations and statements.
/// Consecutive declarations form one batch; statements are parsed with the
/// concept vocabulary known at that point.
pub fn load_document(
    kb: &mut KnowledgeBase,
    text: &str,
    provenance: &Provenance,
) -> Result<LoadSummary, LoadError> {
    let raws = split_sentences(text)?;
    let mut work = kb.clone();
    let mut parser = CeParser::for_model(work.model());
    let mut summary = LoadSummary::default();
    let mut batch: Vec<CeModelDecl> = Vec::new();
    let mut batch_line = 0;

    let flush = |work: &mut KnowledgeBase,
                 parser: &mut CeParser,
                 batch: &mut Vec<CeModelDecl>,
                 line: usize,
                 summary: &mut LoadSummary|
     -> Result<(), LoadError> {
        if batch.is_empty() {
            return Ok(());
        }
        let s = apply_model(work, batch, provenance).map_err(|source| LoadError::Model { line, source })?;
        summary.absorb(s);
        *parser = CeParser::for_model(work.model());
        batch.clear();
        Ok(())
    };

    for raw in &raws {
        let located = parser.parse_raw(raw)?;
        match located.item {
            CeSentence::Model(d) => {
                if batch.is_empty() {
                    batch_line = located.line;
                }
                // a concept declared in this batch may be used as a subject right away
                if let CeModelDecl::Conceptualise { name, .. } = &d {
                    parser.add_concepts([name]);
                }
                batch.push(d);
            }
            CeSentence::Statement(CeStatement::NewInstance { concept, id, clauses }) if clauses.is_empty() => {
                // static instances join the current declaration batch
                if batch.is_empty() {
                    batch_line = located.line;
                }
                batch.push(CeModelDecl::StaticInstance { concept, id });
            }
            CeSentence::Statement(stmt) => {
                flush(&mut work, &mut parser, &mut batch, batch_line, &mut summary)?;
                let created_from = work.instances().count();
                let facts = apply_statement(&mut work, &stmt, provenance)
                    .map_err(|source| LoadError::Model { line: located.line, source })?;
                summary
                    .instances
                    .extend(work.instances().skip(created_from).map(|i| i.id.clone()));
                summary.facts.extend(facts);
            }
        }
    }
    flush(&mut work, &mut parser, &mut batch, batch_line, &mut summary)?;
    *kb = work;
    Ok(summary)
}

/// Asserts one statement atomically and returns the ids of the facts it
/// states, including ones that were already known.
pub fn assert_statement(
    kb: &mut KnowledgeBase,
    stmt: &CeStatement,
    provenance: &Provenance,
) -> Result<Vec<FactId>, KernelError> {
    assert_statements(kb, std::slice::from_ref(stmt), provenance)
}

/// Asserts a batch atomically.
pub fn assert_statements(
    kb: &mut KnowledgeBase,
    stmts: &[CeStatement],
    provenance: &Provenance,
) -> Result<Vec<FactId>, KernelError> {
    let mut work = kb.clone();
    let mut facts = Vec::new();
    for s in stmts {
        facts.extend(apply_statement(&mut work, s, provenance)?);
    }
    *kb = work;
    Ok(facts)
}

/// Creates `id` as a `concept`, or adds the type to an existing instance.
fn upsert(
    kb: &mut KnowledgeBase,
    concept: &str,
    id: &str,
    provenance: &Provenance,
    facts: &mut Vec<FactId>,
) -> Result<String, KernelError> {
    if kb.contains_instance(id) {
        if !kb.is_a(id, concept) {
            facts.push(kb.assert_fact(id, Claim::IsA { concept: fold(concept) }, provenance.clone())?);
        }
    } else {
        kb.declare_instance(id, concept, provenance.clone())?;
    }
    Ok(kb.instance(id).expect("instance exists after upsert").id.clone())
}

pub(crate) fn apply_statement(
    kb: &mut KnowledgeBase,
    stmt: &CeStatement,
    provenance: &Provenance,
) -> Result<Vec<FactId>, KernelError> {
    let mut facts = Vec::new();
    let (concept, id, clauses) = match stmt {
        CeStatement::Because { premises } => {
            for p in premises {
                facts.extend(apply_statement(kb, p, provenance)?);
            }
            return Ok(facts);
        }
        CeStatement::NewInstance { concept, id, clauses } | CeStatement::InstanceFacts { concept, id, clauses } => {
            (concept, id, clauses)
        }
    };
    let subject = upsert(kb, concept, id, provenance, &mut facts)?;

    // types first so later properties can rely on them
    for c in clauses {
        if let Clause::IsA { concept } = c {
            facts.push(kb.assert_fact(&subject, Claim::IsA { concept: concept.clone() }, provenance.clone())?);
        }
    }
    for c in clauses {
        match c {
            Clause::IsA { .. } => {}
            Clause::KnownAs { label } => kb.set_label(&subject, label)?,
            Clause::Property { name, style, value } => {
                let value = match value {
                    ClauseValue::Literal { text } => Value::Literal(text.clone()),
                    ClauseValue::Instance { concept, id } => {
                        Value::Instance(upsert(kb, concept, id, provenance, &mut facts)?)
                    }
                };
                match resolve_property(kb, &subject, name, *style, &value) {
                    Some(property) => {
                        facts.push(kb.assert_fact(&subject, Claim::Property { property, value }, provenance.clone())?)
                    }
                    None => match &value {
                        Value::Literal(text) if fold(name) == "description" => kb.set_description(&subject, text)?,
                        _ => return Err(KernelError::UnknownProperty(format!("{} (on {subject})", fold(name)))),
                    },
                }
            }
        }
    }
    Ok(facts)
}

/// Picks the property named `name` that applies to `subject` and accepts
/// `value`, preferring the stated surface style.
pub fn resolve_property(
    kb: &KnowledgeBase,
    subject: &str,
    name: &str,
    style: PropertyStyle,
    value: &Value,
) -> Option<PropertyId> {
    let candidates = kb.model().properties_named(name, &kb.types_of(subject));
    let fits = |p: &&PropertyDef| match (&p.id.range, value) {
        (PropertyRange::Value, Value::Literal(_)) => true,
        (PropertyRange::Concept(r), Value::Instance(i)) => kb.is_a(i, r),
        _ => false,
    };
    let fitting: Vec<&PropertyDef> = candidates.into_iter().filter(fits).collect();
    fitting
        .iter()
        .find(|p| p.style == style)
        .or_else(|| fitting.first())
        .map(|p| p.id.clone())
}
