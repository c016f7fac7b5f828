//! Knowledge base contents back to CE statements.

use std::collections::BTreeMap;

use crate::kernel::{CeModel, Claim, Fact, KnowledgeBase, SynonymTarget, Value};

use super::ast::{CeModelDecl, CeStatement, Clause, ClauseValue, PropertyDecl};

/// `the <concept> <id>` reference using the instance's primary concept.
pub fn instance_ref(kb: &KnowledgeBase, id: &str) -> ClauseValue {
    match kb.instance(id) {
        Some(inst) => ClauseValue::instance(&inst.concept, &inst.id),
        None => ClauseValue::instance("thing", id),
    }
}

pub fn fact_clause(kb: &KnowledgeBase, fact: &Fact) -> Clause {
    match &fact.claim {
        Claim::IsA { concept } => Clause::is_a(concept),
        Claim::Property { property, value } => {
            let style = kb
                .model()
                .property(property)
                .map(|p| p.style)
                .unwrap_or(crate::kernel::PropertyStyle::Has);
            let value = match value {
                Value::Literal(s) => ClauseValue::literal(s),
                Value::Instance(i) => instance_ref(kb, i),
            };
            Clause::Property {
                name: property.name.clone(),
                style,
                value,
            }
        }
    }
}

/// Single-clause statement about the fact's subject.
pub fn describe_fact(kb: &KnowledgeBase, fact: &Fact) -> CeStatement {
    let concept = kb
        .instance(&fact.subject)
        .map(|i| i.concept.clone())
        .unwrap_or_else(|| "thing".to_string());
    CeStatement::instance_facts(&concept, &fact.subject, vec![fact_clause(kb, fact)])
}

/// Canonical clause order: label, then properties in model declaration
/// order, then extra types. Sorting is stable.
pub fn order_clauses(model: &CeModel, clauses: &mut [Clause]) {
    let rank = |c: &Clause| match c {
        Clause::KnownAs { .. } => (0, 0),
        Clause::Property { name, .. } => (
            1,
            model
                .properties()
                .iter()
                .position(|p| &p.id.name == name)
                .unwrap_or(usize::MAX),
        ),
        Clause::IsA { .. } => (2, 0),
    };
    clauses.sort_by_key(rank);
}

/// Everything known about an instance as one `there is` statement.
pub fn describe_instance(kb: &KnowledgeBase, id: &str) -> Option<CeStatement> {
    let inst = kb.instance(id)?;
    let mut clauses = Vec::new();
    if let Some(label) = &inst.label {
        clauses.push(Clause::KnownAs { label: label.clone() });
    }
    clauses.extend(kb.facts_about(&inst.id).map(|f| fact_clause(kb, f)));
    if let Some(d) = &inst.description {
        clauses.push(Clause::has("description", ClauseValue::literal(d)));
    }
    order_clauses(kb.model(), &mut clauses);
    Some(CeStatement::new_instance(&inst.concept, &inst.id, clauses))
}

/// Model as declarations: one `conceptualise` per concept in declaration
/// order, then synonyms grouped by target.
pub fn describe_model(model: &CeModel) -> Vec<CeModelDecl> {
    let mut out: Vec<CeModelDecl> = model
        .concepts()
        .map(|c| CeModelDecl::Conceptualise {
            name: c.name.clone(),
            parents: c.parents.iter().cloned().collect(),
            properties: model
                .properties()
                .iter()
                .filter(|p| p.id.domain == c.name)
                .map(|p| PropertyDecl {
                    name: p.id.name.clone(),
                    range: p.id.range.clone(),
                    style: p.style,
                })
                .collect(),
        })
        .collect();
    let mut grouped: BTreeMap<&SynonymTarget, Vec<String>> = BTreeMap::new();
    let mut order = Vec::new();
    for s in model.synonyms() {
        let entry = grouped.entry(&s.target).or_insert_with(|| {
            order.push(&s.target);
            Vec::new()
        });
        entry.push(s.surface.join(" "));
    }
    for t in order {
        out.push(CeModelDecl::SynonymDecl {
            target: t.clone(),
            surfaces: grouped.remove(t).unwrap_or_default(),
        });
    }
    out
}
