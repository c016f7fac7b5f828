//! Saving a knowledge base as annotated CE and reading it back.
//!
//! The file is ordinary CE — any CE reader can load it — with `-- @` comment
//! lines carrying what CE cannot say: fact ids, exact property identities
//! and provenance. Reading it back gives a knowledge base equal to the one
//! saved.
//!
//! ```text
//! -- model
//! conceptualise a ~ vehicle ~ V.
//! conceptualise the vehicle V has the value R as ~ registration ~.
//! -- instances and facts
//! -- @instance {"type":"told","source":"PC Jones",...}
//! there is a vehicle named v48.
//! -- @fact f1 vehicle:registration:value {"type":"told",...}
//! the vehicle v48 has DEF456 as registration.
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::bundled::model_provenance;
use crate::ce::{
    describe_fact, load_model, render_model_decl, render_statement, CeError, CeModelDecl, CeParser, CeStatement,
    Clause, ClauseValue,
};
use crate::kernel::{Claim, FactId, KernelError, KnowledgeBase, PropertyId, Provenance, Value};

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: KernelError,
    },
    #[error("line {line}: expected fact {expected}, got {found}")]
    FactOrder { line: usize, expected: FactId, found: FactId },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const MODEL: &str = "-- model";
const CONTENT: &str = "-- instances and facts";
const SYNONYMS: &str = "-- synonyms";

/// Instances and facts in an order that can be replayed: each instance after
/// the facts it was inferred from, each fact after the instances it names.
fn replay_order(kb: &KnowledgeBase) -> Vec<Entry<'_>> {
    let instances: Vec<_> = kb.instances().collect();
    let facts = kb.facts();
    let (mut i, mut f) = (0, 0);
    let mut out = Vec::with_capacity(instances.len() + facts.len());
    let mut seen: BTreeSet<String> = BTreeSet::new();
    while i < instances.len() || f < facts.len() {
        let inst_ready = instances.get(i).is_some_and(|inst| match &inst.origin {
            Provenance::Inferred { premises, .. } => premises.iter().all(|p| p.0 as usize <= f),
            Provenance::Told { .. } => true,
        });
        if inst_ready {
            seen.insert(instances[i].id.to_lowercase());
            out.push(Entry::Instance(instances[i]));
            i += 1;
            continue;
        }
        let fact = &facts[f];
        let declared = |id: &str| seen.contains(&id.to_lowercase());
        let refs_ready = declared(&fact.subject)
            && match &fact.claim {
                Claim::Property { value: Value::Instance(o), .. } => declared(o),
                _ => true,
            };
        if refs_ready || i >= instances.len() {
            out.push(Entry::Fact(fact));
            f += 1;
        } else {
            // Cannot happen for a knowledge base built through its API;
            // fall back to declaration order.
            seen.insert(instances[i].id.to_lowercase());
            out.push(Entry::Instance(instances[i]));
            i += 1;
        }
    }
    out
}

enum Entry<'a> {
    Instance(&'a crate::kernel::Instance),
    Fact(&'a crate::kernel::Fact),
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("provenance serialises")
}

/// The knowledge base as annotated CE.
pub fn save(kb: &KnowledgeBase) -> String {
    let model = kb.model();
    let mut lines = vec![MODEL.to_string()];
    for c in model.concepts() {
        lines.push(render_model_decl(&CeModelDecl::Conceptualise {
            name: c.name.clone(),
            parents: c.parents.iter().cloned().collect(),
            properties: Vec::new(),
        }));
    }
    // One property per declaration keeps their order exactly.
    for p in model.properties() {
        lines.push(render_model_decl(&CeModelDecl::Conceptualise {
            name: p.id.domain.clone(),
            parents: Vec::new(),
            properties: vec![crate::ce::PropertyDecl {
                name: p.id.name.clone(),
                range: p.id.range.clone(),
                style: p.style,
            }],
        }));
    }
    lines.push(CONTENT.to_string());
    for entry in replay_order(kb) {
        match entry {
            Entry::Instance(inst) => {
                lines.push(format!("-- @instance {}", json(&inst.origin)));
                lines.push(render_statement(&CeStatement::new_instance(&inst.concept, &inst.id, Vec::new())));
            }
            Entry::Fact(fact) => {
                let property = match &fact.claim {
                    Claim::Property { property, .. } => property.to_string(),
                    Claim::IsA { .. } => "is-a".to_string(),
                };
                lines.push(format!("-- @fact {} {property} {}", fact.id, json(&fact.provenance)));
                lines.push(render_statement(&describe_fact(kb, fact)));
            }
        }
    }
    for inst in kb.instances() {
        if let Some(label) = &inst.label {
            lines.push("-- @label".to_string());
            let clause = Clause::KnownAs { label: label.clone() };
            lines.push(render_statement(&CeStatement::instance_facts(&inst.concept, &inst.id, vec![clause])));
        }
        if let Some(d) = &inst.description {
            lines.push("-- @description".to_string());
            let clause = Clause::has("description", ClauseValue::literal(d));
            lines.push(render_statement(&CeStatement::instance_facts(&inst.concept, &inst.id, vec![clause])));
        }
    }
    lines.push(SYNONYMS.to_string());
    for s in model.synonyms() {
        lines.push(render_model_decl(&CeModelDecl::SynonymDecl {
            target: s.target.clone(),
            surfaces: vec![s.surface.join(" ")],
        }));
    }
    for (prefix, n) in kb.counters() {
        lines.push(format!("-- @counter {prefix} {n}"));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// A run of text with the annotation above it, if any.
struct Item {
    annotation: Option<String>,
    line: usize,
    body: String,
}

fn items(text: &str) -> Vec<Item> {
    let mut out: Vec<Item> = Vec::new();
    let mut open = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_start();
        if let Some(a) = trimmed.strip_prefix("-- @") {
            out.push(Item {
                annotation: Some(a.trim().to_string()),
                line,
                body: String::new(),
            });
            open = true;
        } else if trimmed.starts_with("--") {
            open = false;
        } else if trimmed.is_empty() && !open {
            continue;
        } else {
            if !open {
                out.push(Item {
                    annotation: None,
                    line,
                    body: String::new(),
                });
                open = true;
            }
            let item = out.last_mut().expect("item opened above");
            if !item.body.is_empty() {
                item.body.push('\n');
            }
            item.body.push_str(raw);
        }
    }
    out
}

/// Reads text written by [`save`].
pub fn load(text: &str) -> Result<KnowledgeBase, PersistError> {
    let mut kb = KnowledgeBase::new();
    let mut next_fact = 1u64;
    for item in items(text) {
        let line = item.line;
        // Positions in the body are relative to where its text starts.
        let body_line = if item.annotation.is_some() { line + 1 } else { line };
        let syntax = |e: CeError| PersistError::Syntax {
            line: body_line + e.line.saturating_sub(1),
            message: format!("column {}: {}", e.column, e.message),
        };
        let model_err = |source: KernelError| PersistError::Model { line, source };
        let parser = CeParser::for_model(kb.model());
        let Some(annotation) = &item.annotation else {
            let decls = parser.parse_model(&item.body).map_err(syntax)?;
            load_model(&mut kb, &decls, &model_provenance()).map_err(model_err)?;
            continue;
        };
        let (tag, rest) = annotation.split_once(' ').unwrap_or((annotation.as_str(), ""));
        let bad = |message: String| PersistError::Syntax { line, message };
        if tag == "counter" {
            let (prefix, n) = rest.trim().split_once(' ').ok_or_else(|| bad("expected '@counter <prefix> <n>'".into()))?;
            let n: u64 = n.trim().parse().map_err(|_| bad(format!("bad counter '{n}'")))?;
            kb.bump_counter(prefix, n);
            continue;
        }
        let stmt = parser.parse_statement(&item.body).map_err(syntax)?;
        let (concept, id) = stmt.subject().ok_or_else(|| bad("expected a statement about an instance".into()))?;
        let (concept, id) = (concept.to_string(), id.to_string());
        match tag {
            "instance" => {
                let origin: Provenance = serde_json::from_str(rest).map_err(|e| bad(format!("provenance: {e}")))?;
                kb.declare_instance(&id, &concept, origin).map_err(model_err)?;
            }
            "fact" => {
                // Property names may contain spaces; the provenance starts
                // at the first brace.
                let parts = rest.split_once(' ').and_then(|(fid, tail)| {
                    let (property, prov) = tail.split_at(tail.find('{')?);
                    Some((fid, property.trim(), prov))
                });
                let Some((fid, property, prov)) = parts else {
                    return Err(bad("expected '@fact <id> <property> <provenance>'".into()));
                };
                let fid: FactId = fid.parse().map_err(bad)?;
                let provenance: Provenance = serde_json::from_str(prov).map_err(|e| bad(format!("provenance: {e}")))?;
                let claim = match (property, stmt.clauses()) {
                    ("is-a", [Clause::IsA { concept }]) => Claim::IsA { concept: concept.clone() },
                    (p, [Clause::Property { value, .. }]) => {
                        let property: PropertyId = p.parse().map_err(model_err)?;
                        let value = match value {
                            ClauseValue::Literal { text } => Value::Literal(text.clone()),
                            ClauseValue::Instance { id, .. } => Value::Instance(id.clone()),
                        };
                        Claim::Property { property, value }
                    }
                    _ => return Err(bad("fact statements have exactly one matching clause".into())),
                };
                let got = kb.assert_fact(&id, claim, provenance).map_err(model_err)?;
                if got != FactId(next_fact) {
                    return Err(PersistError::FactOrder {
                        line,
                        expected: FactId(next_fact),
                        found: got,
                    });
                }
                if got != fid {
                    return Err(PersistError::FactOrder { line, expected: fid, found: got });
                }
                next_fact += 1;
            }
            "label" => match stmt.clauses() {
                [Clause::KnownAs { label }] => kb.set_label(&id, label).map_err(model_err)?,
                _ => return Err(bad("expected 'is known as'".into())),
            },
            "description" => match stmt.clauses() {
                [Clause::Property {
                    value: ClauseValue::Literal { text },
                    ..
                }] => kb.set_description(&id, text).map_err(model_err)?,
                _ => return Err(bad("expected a description".into())),
            },
            other => return Err(bad(format!("unknown annotation '@{other}'"))),
        }
    }
    Ok(kb)
}

pub fn save_to(kb: &KnowledgeBase, path: &Path) -> Result<(), PersistError> {
    std::fs::write(path, save(kb))?;
    Ok(())
}

pub fn load_from(path: &Path) -> Result<KnowledgeBase, PersistError> {
    load(&std::fs::read_to_string(path)?)
}
