//! Random CE statements for round-trip checks.

use proptest::prelude::*;

use moira_core::ce::{CeStatement, Clause, ClauseValue};

/// Lower-case words that are not CE keywords.
pub const WORDS: &[&str] = &[
    "vehicle", "colour", "body", "type", "moving", "thing", "spatial", "area", "road", "travel", "of",
    "direction", "linked", "registration", "married", "to", "drives", "by", "near", "suspect", "sighting",
    "police", "officer", "über", "naïve", "x1",
];

pub fn name() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..4).prop_map(|w| w.join(" "))
}

/// Ids and literals: bare identifiers, and arbitrary text that must be
/// quoted.
pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z][a-zA-Z0-9_]{0,8}",
        "[A-Z]{3}[0-9]{3}",
        any::<String>(),
        Just("it's a \\ test".to_string()),
        Just("and".to_string()),
        Just("the".to_string()),
    ]
}

pub fn verb() -> impl Strategy<Value = String> {
    (any::<bool>(), name()).prop_map(|(is, n)| if is { format!("is {n}") } else { n })
}

pub fn value() -> impl Strategy<Value = ClauseValue> {
    prop_oneof![
        text().prop_map(|t| ClauseValue::Literal { text: t }),
        (name(), text()).prop_map(|(c, id)| ClauseValue::Instance { concept: c, id }),
    ]
}

pub fn clause() -> impl Strategy<Value = Clause> {
    prop_oneof![
        (value(), name()).prop_map(|(v, n)| Clause::has(&n, v)),
        (verb(), value()).prop_map(|(n, v)| Clause::verb(&n, v)),
        name().prop_map(|c| Clause::is_a(&c)),
        text().prop_map(|label| Clause::KnownAs { label }),
    ]
}

pub fn instance_statement() -> impl Strategy<Value = CeStatement> {
    (any::<bool>(), name(), text(), prop::collection::vec(clause(), 0..5)).prop_map(|(new, c, id, clauses)| {
        if new {
            CeStatement::new_instance(&c, &id, clauses)
        } else {
            CeStatement::instance_facts(&c, &id, clauses)
        }
    })
}

pub fn statement() -> impl Strategy<Value = CeStatement> {
    prop_oneof![
        3 => instance_statement(),
        1 => prop::collection::vec(instance_statement(), 1..4).prop_map(|premises| CeStatement::Because { premises }),
    ]
}
