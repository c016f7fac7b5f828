//! Friendlier renderings of CE: short text and icon segments for small
//! displays, with the source CE kept so the gist can always be expanded.

mod template;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ce::{render_statements, CeStatement, Clause, ClauseValue};
use crate::kernel::{fold, Claim, KnowledgeBase, Value};

pub use template::{parse_pattern, parse_templates, GistTemplate, Piece, Slot, Step};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GistError {
    #[error("templates line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("template '{template}': {message}")]
    InvalidTemplate { template: String, message: String },
    #[error("no gist with id '{0}'")]
    UnknownGist(String),
}

/// Why a gist is being shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    /// Telling someone what happened.
    Notify,
    /// Checking an interpretation with the person who made the report.
    Confirm,
    /// Asking someone to approve an action.
    Authorize,
}

impl FromStr for Purpose {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match fold(s).as_str() {
            "notify" => Ok(Purpose::Notify),
            "confirm" => Ok(Purpose::Confirm),
            "authorize" | "authorise" => Ok(Purpose::Authorize),
            other => Err(format!("unknown purpose '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Device {
    Phone,
    Desktop,
    /// Eyeline display: icons plus a few words.
    Glass,
}

impl Device {
    pub fn wants_segments(self) -> bool {
        matches!(self, Device::Glass)
    }
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Device::Phone => "phone",
            Device::Desktop => "desktop",
            Device::Glass => "glass",
        })
    }
}

impl FromStr for Device {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match fold(s).as_str() {
            "phone" => Ok(Device::Phone),
            "desktop" => Ok(Device::Desktop),
            "glass" => Ok(Device::Glass),
            other => Err(format!("unknown device '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GistContext {
    pub role: String,
    pub device: Device,
    pub purpose: Purpose,
}

impl GistContext {
    pub fn new(role: &str, device: Device, purpose: Purpose) -> Self {
        GistContext {
            role: fold(role),
            device,
            purpose,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub icon: String,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GistDescriptor {
    pub text: String,
    pub segments: Vec<Segment>,
    /// Template used, if any; `None` means the text is the CE itself.
    pub template: Option<String>,
    /// Ids of the instances the source statements are about.
    pub sources: Vec<String>,
}

/// Where slot values come from: the statements being gisted first, then
/// each knowledge base in turn.
struct Resolver<'a> {
    statements: &'a [CeStatement],
    sources: &'a [&'a KnowledgeBase],
}

fn clause_value(v: &ClauseValue) -> Value {
    match v {
        ClauseValue::Literal { text } => Value::Literal(text.clone()),
        ClauseValue::Instance { id, .. } => Value::Instance(id.clone()),
    }
}

fn same_id(a: &str, b: &str) -> bool {
    a.to_lowercase() == b.to_lowercase()
}

impl Resolver<'_> {
    fn forward(&self, id: &str, property: &str) -> Option<Value> {
        let from_statements = self
            .statements
            .iter()
            .filter(|s| s.subject().is_some_and(|(_, sid)| same_id(sid, id)))
            .flat_map(|s| s.clauses())
            .filter_map(|c| match c {
                Clause::Property { name, value, .. } if fold(name) == property => Some(clause_value(value)),
                _ => None,
            })
            .last();
        from_statements.or_else(|| {
            self.sources
                .iter()
                .find_map(|kb| kb.values(id, property).into_iter().last().cloned())
        })
    }

    fn backward(&self, id: &str, property: &str) -> Option<Value> {
        let from_statements = self.statements.iter().find_map(|s| {
            let (_, sid) = s.subject()?;
            s.clauses().iter().find_map(|c| match c {
                Clause::Property {
                    name,
                    value: ClauseValue::Instance { id: v, .. },
                    ..
                } if fold(name) == property && same_id(v, id) => Some(Value::Instance(sid.to_string())),
                _ => None,
            })
        });
        from_statements.or_else(|| {
            self.sources.iter().find_map(|kb| {
                kb.facts().iter().find_map(|f| match &f.claim {
                    Claim::Property {
                        property: p,
                        value: Value::Instance(v),
                    } if p.name == property && same_id(v, id) => Some(Value::Instance(f.subject.clone())),
                    _ => None,
                })
            })
        })
    }

    fn label(&self, id: &str) -> Option<String> {
        let from_statements = self
            .statements
            .iter()
            .filter(|s| s.subject().is_some_and(|(_, sid)| same_id(sid, id)))
            .flat_map(|s| s.clauses())
            .find_map(|c| match c {
                Clause::KnownAs { label } => Some(label.clone()),
                _ => None,
            });
        from_statements
            .or_else(|| self.sources.iter().find_map(|kb| kb.instance(id).and_then(|i| i.label.clone())))
    }

    fn resolve(&self, start: &str, path: &[Step]) -> Option<String> {
        let mut current = Value::Instance(start.to_string());
        for step in path {
            let Value::Instance(id) = &current else { return None };
            current = match step {
                Step::Forward(p) => self.forward(id, p)?,
                Step::Backward(p) => self.backward(id, p)?,
                Step::Label => Value::Literal(self.label(id).unwrap_or_else(|| id.clone())),
                Step::Id => Value::Literal(id.clone()),
            };
        }
        Some(current.to_string()).filter(|s| !s.is_empty())
    }

    fn concept_matches(&self, concept: &str, trigger: &str) -> bool {
        fold(concept) == fold(trigger) || self.sources.iter().any(|kb| kb.model().is_subtype(concept, trigger))
    }
}

/// Fills a template for one subject. `None` when a required slot is empty.
fn fill(template: &GistTemplate, resolver: &Resolver, subject: &str, role: &str) -> Option<(String, Vec<(String, String)>)> {
    let withheld = template.withhold.get(role);
    let value = |slot: &Slot| -> Option<String> {
        if withheld.is_some_and(|w| w.contains(&slot.name)) {
            return None;
        }
        resolver.resolve(subject, &slot.path)
    };
    let mut text = String::new();
    let mut filled = Vec::new();
    for piece in &template.pattern {
        match piece {
            Piece::Text(t) => text.push_str(t),
            Piece::Slot(slot) => match value(slot) {
                Some(v) => {
                    if !slot.hidden {
                        text.push_str(&v);
                    }
                    filled.push((slot.name.clone(), v));
                }
                None if template.optional.contains(&slot.name) => {}
                None => return None,
            },
            Piece::Group(group) => {
                let mut part = String::new();
                let mut part_filled = Vec::new();
                let mut complete = true;
                for p in group {
                    match p {
                        Piece::Text(t) => part.push_str(t),
                        Piece::Slot(slot) => match value(slot) {
                            Some(v) => {
                                if !slot.hidden {
                                    part.push_str(&v);
                                }
                                part_filled.push((slot.name.clone(), v));
                            }
                            None => complete = false,
                        },
                        Piece::Group(_) => unreachable!("groups do not nest"),
                    }
                }
                if complete {
                    text.push_str(&part);
                    filled.extend(part_filled);
                }
            }
        }
    }
    Some((text, filled))
}

fn sources_of(statements: &[CeStatement]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in statements {
        if let Some((_, id)) = s.subject() {
            if !out.iter().any(|o| same_id(o, id)) {
                out.push(id.to_string());
            }
        }
    }
    out
}

/// Renders statements as a gist. The first statement (in order) with a
/// template for its concept, the context's role and purpose, and all
/// required slots filled decides the text; otherwise the text is the CE.
pub fn gist(
    statements: &[CeStatement],
    templates: &[GistTemplate],
    context: &GistContext,
    sources: &[&KnowledgeBase],
) -> GistDescriptor {
    let resolver = Resolver { statements, sources };
    let role = fold(&context.role);
    for stmt in statements {
        let Some((concept, subject)) = stmt.subject() else { continue };
        for t in templates {
            if t.purpose != context.purpose || !t.applies_to_role(&role) || !resolver.concept_matches(concept, &t.trigger) {
                continue;
            }
            if let Some((text, filled)) = fill(t, &resolver, subject, &role) {
                let segments = if context.device.wants_segments() {
                    t.icons
                        .iter()
                        .filter_map(|(slot, icon)| {
                            filled.iter().find(|(n, _)| n == slot).map(|(_, v)| Segment {
                                icon: icon.clone(),
                                caption: v.clone(),
                            })
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                return GistDescriptor {
                    text,
                    segments,
                    template: Some(t.name.clone()),
                    sources: sources_of(statements),
                };
            }
        }
    }
    GistDescriptor {
        text: render_statements(statements),
        segments: Vec::new(),
        template: None,
        sources: sources_of(statements),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredGist {
    pub id: String,
    pub statements: Vec<CeStatement>,
    /// The CE exactly as it was when the gist was made.
    pub ce: String,
    pub descriptor: GistDescriptor,
}

/// Remembers what each gist was made from, so it can be expanded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GistStore {
    gists: Vec<StoredGist>,
}

impl GistStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, statements: Vec<CeStatement>, descriptor: GistDescriptor) -> &StoredGist {
        let id = format!("g{}", self.gists.len() + 1);
        let ce = render_statements(&statements);
        self.gists.push(StoredGist {
            id,
            statements,
            ce,
            descriptor,
        });
        self.gists.last().unwrap()
    }

    pub fn get(&self, id: &str) -> Result<&StoredGist, GistError> {
        self.gists
            .iter()
            .find(|g| g.id.eq_ignore_ascii_case(id.trim()))
            .ok_or_else(|| GistError::UnknownGist(id.to_string()))
    }

    /// The statements a gist was made from.
    pub fn expand(&self, id: &str) -> Result<&[CeStatement], GistError> {
        self.get(id).map(|g| g.statements.as_slice())
    }

    pub fn len(&self) -> usize {
        self.gists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gists.is_empty()
    }
}
