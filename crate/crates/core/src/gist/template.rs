//! Gist template files.
//!
//! ```text
//! template lookout
//! trigger: task
//! roles: patrol, volunteer
//! pattern: Be on the lookout for a[ {colour=is seeking instance.colour}] {is looking for} in the {area=operates in} area.
//! withhold volunteer: colour
//! icon area: pin
//! ```
//!
//! Slots are `{path}` or `{name=path}`; `{?name=path}` is a hidden slot that
//! only decides whether its group is shown. A path is a chain of property
//! names separated by dots, `^name` follows a property backwards, and `label`
//! or `id` finish on the instance's known-as label or its id. Text in
//! `[...]` is dropped when any slot in it has no value; a slot outside a
//! group must have a value unless it is listed under `optional:`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::kernel::{fold, CeModel, PropertyRange};

use super::{GistError, Purpose};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Forward(String),
    Backward(String),
    Label,
    Id,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub path: Vec<Step>,
    pub hidden: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Piece {
    Text(String),
    Slot(Slot),
    Group(Vec<Piece>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GistTemplate {
    pub name: String,
    pub trigger: String,
    pub purpose: Purpose,
    /// Roles the template is for; empty means everyone.
    pub roles: BTreeSet<String>,
    pub pattern: Vec<Piece>,
    pub optional: BTreeSet<String>,
    pub withhold: BTreeMap<String, BTreeSet<String>>,
    /// Slot name → icon key, in declaration order.
    pub icons: Vec<(String, String)>,
}

impl GistTemplate {
    pub fn applies_to_role(&self, role: &str) -> bool {
        self.roles.is_empty() || self.roles.contains(&fold(role))
    }

    pub fn slots(&self) -> Vec<&Slot> {
        fn walk<'a>(pieces: &'a [Piece], out: &mut Vec<&'a Slot>) {
            for p in pieces {
                match p {
                    Piece::Slot(s) => out.push(s),
                    Piece::Group(g) => walk(g, out),
                    Piece::Text(_) => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.pattern, &mut out);
        out
    }

    /// Every required slot must start from a property of the trigger concept
    /// (or a property pointing at it, for backward steps).
    pub fn validate(&self, model: &CeModel) -> Result<(), GistError> {
        let invalid = |message: String| GistError::InvalidTemplate {
            template: self.name.clone(),
            message,
        };
        if !model.has_concept(&self.trigger) {
            return Err(invalid(format!("unknown trigger concept '{}'", self.trigger)));
        }
        let names: BTreeSet<&str> = self.slots().iter().map(|s| s.name.as_str()).collect();
        let grouped: BTreeSet<&str> = self
            .pattern
            .iter()
            .filter_map(|p| match p {
                Piece::Group(g) => Some(g),
                _ => None,
            })
            .flatten()
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(s.name.as_str()),
                _ => None,
            })
            .collect();
        for s in self.slots() {
            // Grouped slots are facets an instance may or may not have (a
            // vehicle that is also a moving thing has a direction), so they
            // only need to name some property of the model.
            let loose = grouped.contains(s.name.as_str());
            let ok = match s.path.first() {
                Some(Step::Label | Step::Id) => true,
                Some(Step::Forward(p)) => model
                    .properties()
                    .iter()
                    .any(|d| d.id.name == fold(p) && (loose || model.is_subtype(&self.trigger, &d.id.domain))),
                Some(Step::Backward(p)) => model.properties().iter().any(|d| {
                    d.id.name == fold(p)
                        && (loose
                            || matches!(&d.id.range, PropertyRange::Concept(r) if model.is_subtype(&self.trigger, r)))
                }),
                None => false,
            };
            if !ok {
                return Err(invalid(format!("slot '{}' does not start from a {} property", s.name, self.trigger)));
            }
        }
        let listed = self
            .optional
            .iter()
            .chain(self.withhold.values().flatten())
            .chain(self.icons.iter().map(|(s, _)| s));
        for n in listed {
            if !names.contains(n.as_str()) {
                return Err(invalid(format!("no slot named '{n}'")));
            }
        }
        Ok(())
    }
}

fn parse_path(text: &str) -> Option<Vec<Step>> {
    let mut steps = Vec::new();
    for part in text.split('.') {
        let part = part.trim();
        let step = match part {
            "" => return None,
            "label" => Step::Label,
            "id" => Step::Id,
            p => match p.strip_prefix('^') {
                Some(rest) if !rest.trim().is_empty() => Step::Backward(fold(rest)),
                Some(_) => return None,
                None => Step::Forward(fold(p)),
            },
        };
        steps.push(step);
    }
    Some(steps)
}

fn parse_slot(body: &str) -> Option<Slot> {
    let (hidden, body) = match body.strip_prefix('?') {
        Some(rest) => (true, rest),
        None => (false, body),
    };
    let (name, path) = match body.split_once('=') {
        Some((n, p)) => (n.trim().to_string(), p),
        None => (body.trim().to_string(), body),
    };
    if name.is_empty() {
        return None;
    }
    Some(Slot {
        name,
        path: parse_path(path)?,
        hidden,
    })
}

/// Splits a pattern into text, slots and optional groups.
pub fn parse_pattern(text: &str) -> Result<Vec<Piece>, String> {
    let mut stack: Vec<Vec<Piece>> = vec![Vec::new()];
    let mut buf = String::new();
    let mut chars = text.chars();
    let flush = |buf: &mut String, top: &mut Vec<Piece>| {
        if !buf.is_empty() {
            top.push(Piece::Text(std::mem::take(buf)));
        }
    };
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                flush(&mut buf, stack.last_mut().unwrap());
                let body: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let slot = parse_slot(&body).ok_or_else(|| format!("bad slot '{{{body}}}'"))?;
                stack.last_mut().unwrap().push(Piece::Slot(slot));
            }
            '}' => return Err("'}' without '{'".into()),
            '[' => {
                if stack.len() > 1 {
                    return Err("groups do not nest".into());
                }
                flush(&mut buf, stack.last_mut().unwrap());
                stack.push(Vec::new());
            }
            ']' => {
                if stack.len() < 2 {
                    return Err("']' without '['".into());
                }
                flush(&mut buf, stack.last_mut().unwrap());
                let group = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Piece::Group(group));
            }
            c => buf.push(c),
        }
    }
    if stack.len() > 1 {
        return Err("unclosed '['".into());
    }
    let mut top = stack.pop().unwrap();
    flush(&mut buf, &mut top);
    Ok(top)
}

fn list(text: &str) -> BTreeSet<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// Reads a template file.
pub fn parse_templates(text: &str) -> Result<Vec<GistTemplate>, GistError> {
    let mut out: Vec<GistTemplate> = Vec::new();
    let mut pattern_seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("--") {
            continue;
        }
        let syntax = |message: String| GistError::Syntax { line: line_no, message };
        if let Some(name) = line.strip_prefix("template ") {
            if out.iter().any(|t| t.name == name.trim()) {
                return Err(syntax(format!("template '{}' defined twice", name.trim())));
            }
            out.push(GistTemplate {
                name: name.trim().to_string(),
                trigger: String::new(),
                purpose: Purpose::Notify,
                roles: BTreeSet::new(),
                pattern: Vec::new(),
                optional: BTreeSet::new(),
                withhold: BTreeMap::new(),
                icons: Vec::new(),
            });
            pattern_seen.push(false);
            continue;
        }
        let current = out
            .last_mut()
            .ok_or_else(|| syntax("expected 'template <name>'".into()))?;
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| syntax(format!("expected 'key: value', found '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "trigger" => current.trigger = fold(value),
            "purpose" => current.purpose = value.parse().map_err(syntax)?,
            "roles" if value == "*" => current.roles.clear(),
            "roles" => current.roles = list(value).iter().map(|r| fold(r)).collect(),
            "pattern" => {
                current.pattern = parse_pattern(value).map_err(syntax)?;
                *pattern_seen.last_mut().unwrap() = true;
            }
            "optional" => current.optional = list(value),
            k if k.starts_with("withhold ") => {
                let role = fold(&k["withhold ".len()..]);
                current.withhold.entry(role).or_default().extend(list(value));
            }
            k if k.starts_with("icon ") => {
                current.icons.push((k["icon ".len()..].trim().to_string(), value.to_string()));
            }
            other => return Err(syntax(format!("unknown key '{other}'"))),
        }
    }
    for (t, has_pattern) in out.iter().zip(pattern_seen) {
        if t.trigger.is_empty() || !has_pattern {
            return Err(GistError::InvalidTemplate {
                template: t.name.clone(),
                message: "needs a trigger and a pattern".into(),
            });
        }
    }
    Ok(out)
}
