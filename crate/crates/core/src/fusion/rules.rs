//! Rule files.
//!
//! ```text
//! rule suspect sighting
//! priority 10
//! if:
//!   ?p is a suspect
//!   ?p has ?r as linked vehicle registration
//!   ?v has ?r as registration
//! then:
//!   SS_?v is a suspect sighting
//!   SS_?v has ?v as target vehicle
//!   SS_?v has ?p as suspect candidate
//! ```
//!
//! A pattern is `S is a C`, `S has O as P` or `S <verb phrase> O`. Terms
//! starting with `?` are variables, quoted terms are literals, bare terms
//! are instance ids, and bare terms with an embedded `?var` are id templates
//! (productions only).

use std::collections::BTreeSet;
use std::fmt;

use crate::kernel::{fold, CeModel, PropertyStyle};

use super::FusionError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Instance(String),
    Literal(String),
    /// An id built from variables, e.g. `SS_?v`.
    Template(String),
}

impl Term {
    fn parse(raw: &RawToken) -> Term {
        match raw {
            RawToken::Quoted(q) => Term::Literal(q.clone()),
            RawToken::Bare(b) if b.starts_with('?') => Term::Var(b[1..].to_string()),
            RawToken::Bare(b) if b.contains('?') => Term::Template(b.clone()),
            RawToken::Bare(b) => Term::Instance(b.clone()),
        }
    }

    /// Variables mentioned by the term.
    pub fn vars(&self) -> Vec<String> {
        match self {
            Term::Var(v) => vec![v.clone()],
            Term::Template(t) => template_vars(t),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Instance(i) | Term::Template(i) => f.write_str(i),
            Term::Literal(l) => write!(f, "'{l}'"),
        }
    }
}

fn is_var_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn template_vars(t: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = t;
    while let Some(i) = rest.find('?') {
        let tail = &rest[i + 1..];
        let end = tail.find(|c: char| !is_var_char(c)).unwrap_or(tail.len());
        out.push(tail[..end].to_string());
        rest = &tail[end..];
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternKind {
    IsA { concept: String },
    Property { name: String, style: PropertyStyle, object: Term },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub subject: Term,
    pub kind: PatternKind,
}

impl Pattern {
    pub fn vars(&self) -> Vec<String> {
        let mut v = self.subject.vars();
        if let PatternKind::Property { object, .. } = &self.kind {
            v.extend(object.vars());
        }
        v
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PatternKind::IsA { concept } => write!(f, "{} is a {concept}", self.subject),
            PatternKind::Property {
                name,
                style: PropertyStyle::Has,
                object,
            } => write!(f, "{} has {object} as {name}", self.subject),
            PatternKind::Property {
                name,
                style: PropertyStyle::Verb,
                object,
            } => write!(f, "{} {name} {object}", self.subject),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub priority: i32,
    pub conditions: Vec<Pattern>,
    pub productions: Vec<Pattern>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule {}", self.name)?;
        writeln!(f, "priority {}", self.priority)?;
        writeln!(f, "if:")?;
        for c in &self.conditions {
            writeln!(f, "  {c}")?;
        }
        writeln!(f, "then:")?;
        for p in &self.productions {
            writeln!(f, "  {p}")?;
        }
        Ok(())
    }
}

impl Rule {
    /// Checks variable binding and the model references of every pattern.
    pub fn validate(&self, model: &CeModel) -> Result<(), FusionError> {
        let err = |message: String| FusionError::InvalidRule {
            rule: self.name.clone(),
            message,
        };
        if self.conditions.is_empty() {
            return Err(err("a rule needs at least one condition".into()));
        }
        if self.productions.is_empty() {
            return Err(err("a rule needs at least one production".into()));
        }
        let bound: BTreeSet<String> = self.conditions.iter().flat_map(Pattern::vars).collect();
        for c in &self.conditions {
            if matches!(c.subject, Term::Template(_)) {
                return Err(err(format!("id templates are only allowed in productions: {c}")));
            }
        }
        for p in &self.productions {
            for v in p.vars() {
                if !bound.contains(&v) {
                    return Err(err(format!("variable ?{v} in '{p}' is not bound by any condition")));
                }
            }
            if matches!(p.subject, Term::Literal(_)) {
                return Err(err(format!("a literal cannot be a subject: {p}")));
            }
        }
        for p in self.conditions.iter().chain(&self.productions) {
            match &p.kind {
                PatternKind::IsA { concept } => {
                    if !model.has_concept(concept) {
                        return Err(err(format!("unknown concept '{concept}'")));
                    }
                }
                PatternKind::Property { name, .. } => {
                    if !model.properties().iter().any(|d| &d.id.name == name) {
                        return Err(err(format!("unknown property '{name}'")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum RawToken {
    Bare(String),
    Quoted(String),
}

impl RawToken {
    fn is(&self, kw: &str) -> bool {
        matches!(self, RawToken::Bare(b) if b.eq_ignore_ascii_case(kw))
    }

    fn word(&self) -> Option<&str> {
        match self {
            RawToken::Bare(b) => Some(b),
            RawToken::Quoted(_) => None,
        }
    }
}

fn split_line(line: &str, lineno: usize) -> Result<Vec<RawToken>, FusionError> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '\'' || c == '`' {
            chars.next();
            let mut q = String::new();
            let mut closed = false;
            for d in chars.by_ref() {
                if d == '\'' {
                    closed = true;
                    break;
                }
                q.push(d);
            }
            if !closed {
                return Err(FusionError::Syntax {
                    line: lineno,
                    message: "unterminated quoted value".into(),
                });
            }
            out.push(RawToken::Quoted(q));
        } else {
            let mut b = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_whitespace() {
                    break;
                }
                b.push(d);
                chars.next();
            }
            out.push(RawToken::Bare(b));
        }
    }
    Ok(out)
}

fn parse_pattern(line: &str, lineno: usize) -> Result<Pattern, FusionError> {
    let toks = split_line(line, lineno)?;
    let syntax = |message: &str| FusionError::Syntax {
        line: lineno,
        message: format!("{message}: '{line}'"),
    };
    if toks.len() < 3 {
        return Err(syntax("expected 'S is a C', 'S has O as P' or 'S <verb> O'"));
    }
    let subject = Term::parse(&toks[0]);
    let words_of = |ts: &[RawToken]| -> Result<String, FusionError> {
        let words: Option<Vec<&str>> = ts.iter().map(RawToken::word).collect();
        match words {
            Some(w) if !w.is_empty() => Ok(fold(&w.join(" "))),
            _ => Err(syntax("expected plain words")),
        }
    };
    if toks[1].is("is") && (toks[2].is("a") || toks[2].is("an")) {
        let concept = words_of(&toks[3..])?;
        return Ok(Pattern {
            subject,
            kind: PatternKind::IsA { concept },
        });
    }
    if toks[1].is("has") {
        let as_pos = toks
            .iter()
            .position(|t| t.is("as"))
            .filter(|&p| p == 3)
            .ok_or_else(|| syntax("expected 'S has O as P'"))?;
        let object = Term::parse(&toks[2]);
        let name = words_of(&toks[as_pos + 1..])?;
        return Ok(Pattern {
            subject,
            kind: PatternKind::Property {
                name,
                style: PropertyStyle::Has,
                object,
            },
        });
    }
    let object = Term::parse(toks.last().expect("at least three tokens"));
    let name = words_of(&toks[1..toks.len() - 1])?;
    Ok(Pattern {
        subject,
        kind: PatternKind::Property {
            name,
            style: PropertyStyle::Verb,
            object,
        },
    })
}

#[derive(PartialEq)]
enum Section {
    Header,
    If,
    Then,
}

/// Parses a rule file. Lines starting with `--` are comments.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, FusionError> {
    let mut rules: Vec<Rule> = Vec::new();
    let mut section = Section::Header;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("--") {
            continue;
        }
        let syntax = |message: String| FusionError::Syntax { line: lineno, message };
        if let Some(name) = line.strip_prefix("rule ") {
            rules.push(Rule {
                name: name.trim().to_string(),
                priority: 0,
                conditions: Vec::new(),
                productions: Vec::new(),
            });
            section = Section::Header;
            continue;
        }
        let Some(rule) = rules.last_mut() else {
            return Err(syntax(format!("expected 'rule <name>', found '{line}'")));
        };
        if let Some(p) = line.strip_prefix("priority ") {
            if section != Section::Header {
                return Err(syntax("priority must come before 'if:'".into()));
            }
            rule.priority = p
                .trim()
                .parse()
                .map_err(|_| syntax(format!("priority must be an integer, found '{}'", p.trim())))?;
        } else if line == "if:" {
            section = Section::If;
        } else if line == "then:" {
            if section != Section::If {
                return Err(syntax("'then:' must follow 'if:'".into()));
            }
            section = Section::Then;
        } else {
            match section {
                Section::Header => return Err(syntax(format!("expected 'priority', 'if:' or 'then:', found '{line}'"))),
                Section::If => rule.conditions.push(parse_pattern(line, lineno)?),
                Section::Then => rule.productions.push(parse_pattern(line, lineno)?),
            }
        }
    }
    let mut names = BTreeSet::new();
    for r in &rules {
        if !names.insert(r.name.clone()) {
            return Err(FusionError::InvalidRule {
                rule: r.name.clone(),
                message: "duplicate rule name".into(),
            });
        }
    }
    Ok(rules)
}
