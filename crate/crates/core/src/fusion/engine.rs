use std::collections::{BTreeMap, BTreeSet};

use crate::ce::resolve_property;
use crate::kernel::{fold, Claim, Fact, FactId, KnowledgeBase, Provenance, Value};

use super::rules::{Pattern, PatternKind, Rule, Term};
use super::FusionError;

/// Safety net: the bundled rules reach their fixpoint in two rounds.
pub const MAX_ROUNDS: usize = 64;

pub type Binding = BTreeMap<String, Value>;

/// What justified one condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Support {
    Fact(FactId),
    /// The instance's own concept satisfied an `is a` condition.
    Instance(usize),
}

#[derive(Debug, Clone)]
pub struct Match {
    pub binding: Binding,
    supports: Vec<Support>,
}

impl Match {
    /// Premise facts in condition order, without repeats.
    pub fn premises(&self) -> Vec<FactId> {
        let mut seen = BTreeSet::new();
        self.supports
            .iter()
            .filter_map(|s| match s {
                Support::Fact(f) if seen.insert(*f) => Some(*f),
                _ => None,
            })
            .collect()
    }

    fn is_new(&self, facts_before: u64, instances_before: usize) -> bool {
        self.supports.iter().any(|s| match s {
            Support::Fact(f) => f.0 > facts_before,
            Support::Instance(i) => *i >= instances_before,
        })
    }
}

fn same_value(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Literal(x), Value::Literal(y)) => x == y,
        (Value::Instance(x), Value::Instance(y)) => x.eq_ignore_ascii_case(y),
        _ => false,
    }
}

/// Facts grouped by property name, built once per round.
struct Index<'k> {
    by_name: BTreeMap<&'k str, Vec<&'k Fact>>,
    positions: BTreeMap<String, usize>,
}

impl<'k> Index<'k> {
    fn new(kb: &'k KnowledgeBase) -> Self {
        let mut by_name: BTreeMap<&str, Vec<&Fact>> = BTreeMap::new();
        for f in kb.facts() {
            if let Claim::Property { property, .. } = &f.claim {
                by_name.entry(property.name.as_str()).or_default().push(f);
            }
        }
        let positions = kb
            .instances()
            .enumerate()
            .map(|(i, inst)| (inst.id.to_lowercase(), i))
            .collect();
        Index { by_name, positions }
    }
}

/// Value of a condition term under a binding: `Some` when fixed.
fn term_value(term: &Term, binding: &Binding) -> Option<Value> {
    match term {
        Term::Var(v) => binding.get(v).cloned(),
        Term::Instance(i) => Some(Value::Instance(i.clone())),
        Term::Literal(l) => Some(Value::Literal(l.clone())),
        Term::Template(_) => None,
    }
}

fn bind(term: &Term, value: &Value, binding: &mut Binding) -> bool {
    match term {
        Term::Var(v) => match binding.get(v) {
            Some(b) => same_value(b, value),
            None => {
                binding.insert(v.clone(), value.clone());
                true
            }
        },
        other => term_value(other, binding).is_some_and(|t| same_value(&t, value)),
    }
}

fn solve(
    kb: &KnowledgeBase,
    index: &Index,
    conditions: &[Pattern],
    binding: Binding,
    supports: Vec<Support>,
    out: &mut Vec<Match>,
) {
    let Some((cond, rest)) = conditions.split_first() else {
        out.push(Match { binding, supports });
        return;
    };
    match &cond.kind {
        PatternKind::IsA { concept } => {
            let subjects: Vec<String> = match term_value(&cond.subject, &binding) {
                Some(Value::Instance(id)) => vec![id],
                Some(Value::Literal(_)) => return,
                _ => kb.instances().map(|i| i.id.clone()).collect(),
            };
            for s in subjects {
                let Some(inst) = kb.instance(&s) else { continue };
                let support = if kb.model().is_subtype(&inst.concept, concept) {
                    Some(Support::Instance(index.positions[&inst.id.to_lowercase()]))
                } else {
                    kb.facts_about(&inst.id)
                        .find(|f| matches!(&f.claim, Claim::IsA { concept: c } if kb.model().is_subtype(c, concept)))
                        .map(|f| Support::Fact(f.id))
                };
                let Some(support) = support else { continue };
                let mut b = binding.clone();
                if !bind(&cond.subject, &Value::Instance(inst.id.clone()), &mut b) {
                    continue;
                }
                let mut sup = supports.clone();
                sup.push(support);
                solve(kb, index, rest, b, sup, out);
            }
        }
        PatternKind::Property { name, object, .. } => {
            let Some(facts) = index.by_name.get(name.as_str()) else { return };
            for f in facts {
                let Claim::Property { value, .. } = &f.claim else { continue };
                let mut b = binding.clone();
                if !bind(&cond.subject, &Value::Instance(f.subject.clone()), &mut b) || !bind(object, value, &mut b) {
                    continue;
                }
                let mut sup = supports.clone();
                sup.push(Support::Fact(f.id));
                solve(kb, index, rest, b, sup, out);
            }
        }
    }
}

/// Every way the rule's conditions hold in the knowledge base.
pub fn matches(kb: &KnowledgeBase, rule: &Rule) -> Vec<Match> {
    let index = Index::new(kb);
    let mut out = Vec::new();
    solve(kb, &index, &rule.conditions, Binding::new(), Vec::new(), &mut out);
    out
}

fn expand_template(t: &str, binding: &Binding) -> String {
    let mut out = String::new();
    let mut rest = t;
    while let Some(i) = rest.find('?') {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 1..];
        let end = tail.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(tail.len());
        if let Some(v) = binding.get(&tail[..end]) {
            out.push_str(&v.to_string());
        }
        rest = &tail[end..];
    }
    out.push_str(rest);
    out
}

/// Production term as a value.
pub fn production_value(term: &Term, binding: &Binding) -> Value {
    match term {
        Term::Var(v) => binding.get(v).cloned().unwrap_or_else(|| Value::Literal(String::new())),
        Term::Instance(i) => Value::Instance(i.clone()),
        Term::Literal(l) => Value::Literal(l.clone()),
        Term::Template(t) => Value::Instance(expand_template(t, binding)),
    }
}

/// Outcome of one production.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derived {
    Instance(String),
    Fact(FactId),
    Nothing,
}

/// Applies one production. Derived instances are created with the rule's
/// provenance; re-deriving something already known changes nothing.
pub fn apply_production(
    kb: &mut KnowledgeBase,
    rule: &Rule,
    production: &Pattern,
    binding: &Binding,
    premises: &[FactId],
) -> Result<Derived, FusionError> {
    let provenance = Provenance::Inferred {
        rule: rule.name.clone(),
        premises: premises.to_vec(),
    };
    let wrap = |source| FusionError::Production {
        rule: rule.name.clone(),
        production: production.to_string(),
        source,
    };
    let Value::Instance(subject) = production_value(&production.subject, binding) else {
        return Err(FusionError::InvalidRule {
            rule: rule.name.clone(),
            message: format!("subject of '{production}' is not an instance"),
        });
    };
    let before = kb.facts().len() as u64;
    match &production.kind {
        PatternKind::IsA { concept } => {
            if !kb.contains_instance(&subject) {
                kb.declare_instance(&subject, concept, provenance).map_err(wrap)?;
                return Ok(Derived::Instance(subject));
            }
            if kb.is_a(&subject, concept) {
                return Ok(Derived::Nothing);
            }
            let id = kb
                .assert_fact(&subject, Claim::IsA { concept: fold(concept) }, provenance)
                .map_err(wrap)?;
            Ok(if id.0 > before { Derived::Fact(id) } else { Derived::Nothing })
        }
        PatternKind::Property { name, style, object } => {
            let value = production_value(object, binding);
            if !kb.contains_instance(&subject) {
                return Err(wrap(crate::kernel::KernelError::UnknownInstance(subject)));
            }
            let property = resolve_property(kb, &subject, name, *style, &value).ok_or_else(|| {
                wrap(crate::kernel::KernelError::UnknownProperty(format!("{name} (on {subject} with {value})")))
            })?;
            let id = kb
                .assert_fact(&subject, Claim::Property { property, value }, provenance)
                .map_err(wrap)?;
            Ok(if id.0 > before { Derived::Fact(id) } else { Derived::Nothing })
        }
    }
}

/// Result of a run to fixpoint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub new_facts: Vec<FactId>,
    pub new_instances: Vec<String>,
    pub rounds: usize,
}

/// Rules in evaluation order: higher priority first, then by name.
pub fn ordered(rules: &[Rule]) -> Vec<&Rule> {
    let mut r: Vec<&Rule> = rules.iter().collect();
    r.sort_by(|a, b| b.priority.cmp(&a.priority).then_with(|| a.name.cmp(&b.name)));
    r
}

/// Forward-chains to a fixpoint. Each round only fires matches that use
/// something derived or added since the previous round. Atomic: on error the
/// knowledge base is unchanged.
pub fn run_rules(kb: &mut KnowledgeBase, rules: &[Rule]) -> Result<RunReport, FusionError> {
    for r in rules {
        r.validate(kb.model())?;
    }
    let mut work = kb.clone();
    let mut report = RunReport::default();
    let (mut facts_mark, mut inst_mark) = (0u64, 0usize);
    for round in 1..=MAX_ROUNDS {
        report.rounds = round;
        let facts_now = work.facts().len() as u64;
        let inst_now = work.instances().count();
        let mut pending = Vec::new();
        for rule in ordered(rules) {
            for m in matches(&work, rule) {
                if m.is_new(facts_mark, inst_mark) {
                    pending.push((rule, m));
                }
            }
        }
        facts_mark = facts_now;
        inst_mark = inst_now;
        let mut changed = false;
        for (rule, m) in pending {
            let premises = m.premises();
            for p in &rule.productions {
                match apply_production(&mut work, rule, p, &m.binding, &premises)? {
                    Derived::Instance(id) => {
                        report.new_instances.push(id);
                        changed = true;
                    }
                    Derived::Fact(f) => {
                        report.new_facts.push(f);
                        changed = true;
                    }
                    Derived::Nothing => {}
                }
            }
        }
        if !changed {
            *kb = work;
            return Ok(report);
        }
    }
    Err(FusionError::NoFixpoint { rounds: MAX_ROUNDS })
}

/// Checks every inferred fact and instance against its rule: some match of
/// the rule's conditions must have exactly the recorded premises and its
/// productions must yield the fact.
pub fn audit(kb: &KnowledgeBase, rules: &[Rule]) -> Result<(), String> {
    let by_name: BTreeMap<&str, &Rule> = rules.iter().map(|r| (r.name.as_str(), r)).collect();
    let check = |what: String, rule: &str, premises: &[FactId], produced: &dyn Fn(&Rule, &Binding) -> bool| {
        let r = by_name.get(rule).ok_or_else(|| format!("{what}: unknown rule '{rule}'"))?;
        for p in premises {
            if kb.fact(*p).is_none() {
                return Err(format!("{what}: premise {p} missing"));
            }
        }
        let ok = matches(kb, r)
            .into_iter()
            .any(|m| m.premises() == premises && produced(r, &m.binding));
        if ok {
            Ok(())
        } else {
            Err(format!("{what}: no match of rule '{rule}' reproduces it"))
        }
    };
    for f in kb.facts() {
        if let Provenance::Inferred { rule, premises } = &f.provenance {
            check(format!("fact {}", f.id), rule, premises, &|r, b| {
                r.productions.iter().any(|p| produces_fact(p, b, f))
            })?;
        }
    }
    for inst in kb.instances() {
        if let Provenance::Inferred { rule, premises } = &inst.origin {
            check(format!("instance {}", inst.id), rule, premises, &|r, b| {
                r.productions.iter().any(|p| {
                    matches!(&p.kind, PatternKind::IsA { concept } if *concept == inst.concept)
                        && matches!(production_value(&p.subject, b), Value::Instance(i) if i.eq_ignore_ascii_case(&inst.id))
                })
            })?;
        }
    }
    Ok(())
}

fn produces_fact(p: &Pattern, b: &Binding, f: &Fact) -> bool {
    let Value::Instance(subject) = production_value(&p.subject, b) else { return false };
    if !subject.eq_ignore_ascii_case(&f.subject) {
        return false;
    }
    match (&p.kind, &f.claim) {
        (PatternKind::IsA { concept }, Claim::IsA { concept: c }) => concept == c,
        (PatternKind::Property { name, object, .. }, Claim::Property { property, value }) => {
            *name == property.name && same_value(&production_value(object, b), value)
        }
        _ => false,
    }
}
