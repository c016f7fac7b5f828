//! Canonical CE text. Output is deterministic and re-parses to the same AST.

use crate::kernel::{PropertyRange, PropertyStyle, SynonymTarget};

use super::ast::{CeModelDecl, CeStatement, Clause, ClauseValue, PropertyDecl};

const KEYWORDS: &[&str] = &[
    "a", "an", "and", "as", "because", "has", "is", "known", "named", "that", "the", "there",
    "conceptualise",
];

/// Quotes a value with straight quotes, escaping `\` and both closing
/// quotes the reader accepts.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('\'');
    for c in text.chars() {
        if matches!(c, '\\' | '\'' | '\u{2019}') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

/// Whether `text` can appear unquoted as a single token.
pub fn is_bare(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_alphanumeric() => {}
        _ => return false,
    }
    text.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
        && !text.ends_with('-')
        && !KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(text))
}

pub(crate) fn token(text: &str) -> String {
    if is_bare(text) {
        text.to_string()
    } else {
        quote(text)
    }
}

pub fn article(noun: &str) -> &'static str {
    match noun.chars().next() {
        Some(c) if "aeiouAEIOU".contains(c) => "an",
        _ => "a",
    }
}

fn render_value(out: &mut String, value: &ClauseValue, verb: bool) {
    match value {
        ClauseValue::Literal { text } if verb => out.push_str(&quote(text)),
        // identifier-like literals (registrations, numbers) stay bare
        ClauseValue::Literal { text } if is_bare(text) && text.chars().any(|c| c.is_ascii_digit()) => {
            out.push_str(text)
        }
        ClauseValue::Literal { text } => out.push_str(&quote(text)),
        ClauseValue::Instance { concept, id } => {
            out.push_str("the ");
            out.push_str(concept);
            out.push(' ');
            out.push_str(&token(id));
        }
    }
}

pub fn render_clause(clause: &Clause) -> String {
    let mut out = String::new();
    match clause {
        Clause::Property {
            name,
            style: PropertyStyle::Has,
            value,
        } => {
            out.push_str("has ");
            render_value(&mut out, value, false);
            out.push_str(" as ");
            out.push_str(name);
        }
        Clause::Property {
            name,
            style: PropertyStyle::Verb,
            value,
        } => {
            out.push_str(name);
            out.push(' ');
            render_value(&mut out, value, true);
        }
        Clause::IsA { concept } => {
            out.push_str("is ");
            out.push_str(article(concept));
            out.push(' ');
            out.push_str(concept);
        }
        Clause::KnownAs { label } => {
            out.push_str("is known as ");
            out.push_str(&quote(label));
        }
    }
    out
}

fn render_clauses(clauses: &[Clause]) -> String {
    clauses
        .iter()
        .map(render_clause)
        .collect::<Vec<_>>()
        .join(" and ")
}

/// Statement text without the final period.
pub fn render_body(stmt: &CeStatement) -> String {
    match stmt {
        CeStatement::NewInstance { concept, id, clauses } => {
            let mut s = format!("there is {} {} named {}", article(concept), concept, token(id));
            if !clauses.is_empty() {
                s.push_str(" that ");
                s.push_str(&render_clauses(clauses));
            }
            s
        }
        CeStatement::InstanceFacts { concept, id, clauses } => {
            // Before a verb phrase a bare id would read as part of the
            // concept name; quoting marks where the subject ends. Phrases
            // opening with `is` or `has` already mark it.
            let verb_first = matches!(
                clauses.first(),
                Some(Clause::Property { style: PropertyStyle::Verb, name, .. })
                    if !matches!(name.split(' ').next(), Some("is" | "has"))
            );
            let id = if verb_first { quote(id) } else { token(id) };
            let mut s = format!("the {concept} {id}");
            if !clauses.is_empty() {
                s.push(' ');
                s.push_str(&render_clauses(clauses));
            }
            s
        }
        CeStatement::Because { premises } => {
            let parts: Vec<String> = premises.iter().map(render_body).collect();
            format!("because {}", parts.join(" and "))
        }
    }
}

pub fn render_statement(stmt: &CeStatement) -> String {
    format!("{}.", render_body(stmt))
}

/// One statement per line.
pub fn render_statements(stmts: &[CeStatement]) -> String {
    stmts
        .iter()
        .map(render_statement)
        .collect::<Vec<_>>()
        .join("\n")
}

fn variable_for(name: &str) -> String {
    name.split_whitespace()
        .filter_map(|w| w.chars().next())
        .flat_map(char::to_uppercase)
        .collect()
}

fn render_property_decl(p: &PropertyDecl, n: usize) -> String {
    match (&p.style, &p.range) {
        (PropertyStyle::Has, PropertyRange::Value) => {
            format!("has the value V{n} as ~ {} ~", p.name)
        }
        (PropertyStyle::Has, PropertyRange::Concept(c)) => {
            format!("has the {c} {}{n} as ~ {} ~", variable_for(c), p.name)
        }
        (PropertyStyle::Verb, PropertyRange::Concept(c)) => {
            format!("~ {} ~ the {c} {}{n}", p.name, variable_for(c))
        }
        (PropertyStyle::Verb, PropertyRange::Value) => {
            format!("~ {} ~ the value V{n}", p.name)
        }
    }
}

pub fn render_model_decl(decl: &CeModelDecl) -> String {
    match decl {
        CeModelDecl::Conceptualise {
            name,
            parents,
            properties,
        } => {
            let mut s = format!(
                "conceptualise {} ~ {} ~ {}",
                article(name),
                name,
                variable_for(name)
            );
            let mut clauses: Vec<String> = parents
                .iter()
                .map(|p| format!("is {} {}", article(p), p))
                .collect();
            clauses.extend(
                properties
                    .iter()
                    .enumerate()
                    .map(|(i, p)| render_property_decl(p, i + 1)),
            );
            if !clauses.is_empty() {
                s.push_str(" that ");
                s.push_str(&clauses.join(" and "));
            }
            s.push('.');
            s
        }
        CeModelDecl::SynonymDecl { target, surfaces } => {
            let head = match target {
                SynonymTarget::Concept(c) => format!("the entity concept {}", quote(c)),
                SynonymTarget::Property(p) => format!("the relation concept {}", quote(&p.to_string())),
                SynonymTarget::Instance(i) => format!("the instance {}", quote(i)),
            };
            let values: Vec<String> = surfaces
                .iter()
                .map(|s| format!("is expressed by the value {}", quote(s)))
                .collect();
            format!("{head} {}.", values.join(" and "))
        }
        CeModelDecl::StaticInstance { concept, id } => {
            format!("there is {} {} named {}.", article(concept), concept, token(id))
        }
    }
}
