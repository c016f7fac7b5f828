use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::lexicon::{normalize_word, Element, LexEntry, Lexicon, MatchVia};
use super::model::{fold, CeModel, Concept, PropertyDef, PropertyId, PropertyRange, Synonym, SynonymTarget};
use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FactId(pub u64);

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

impl FromStr for FactId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('f')
            .and_then(|n| n.parse().ok())
            .map(FactId)
            .ok_or_else(|| format!("not a fact id: '{s}'"))
    }
}

impl From<FactId> for String {
    fn from(id: FactId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for FactId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Literal(String),
    Instance(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Literal(s) | Value::Instance(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Claim {
    IsA { concept: String },
    Property { property: PropertyId, value: Value },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    Told {
        source: String,
        conversation: Option<String>,
        timestamp: DateTime<Utc>,
    },
    Inferred {
        rule: String,
        premises: Vec<FactId>,
    },
}

impl Provenance {
    pub fn told(source: &str, timestamp: DateTime<Utc>) -> Self {
        Provenance::Told {
            source: source.to_string(),
            conversation: None,
            timestamp,
        }
    }

    pub fn is_inferred(&self) -> bool {
        matches!(self, Provenance::Inferred { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub concept: String,
    pub label: Option<String>,
    pub description: Option<String>,
    pub origin: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub id: FactId,
    pub subject: String,
    pub claim: Claim,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum PropertySelector {
    IsA,
    Name(String),
    Id(PropertyId),
}

/// Triple pattern; `None` is a wildcard.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactPattern {
    pub subject: Option<String>,
    pub property: Option<PropertySelector>,
    pub object: Option<String>,
    /// Restricts subjects to instances of this concept or its subtypes.
    pub subject_type: Option<String>,
}

impl FactPattern {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn subject(mut self, s: &str) -> Self {
        self.subject = Some(s.to_string());
        self
    }

    pub fn property(mut self, name: &str) -> Self {
        self.property = Some(PropertySelector::Name(name.to_string()));
        self
    }

    pub fn is_a(mut self) -> Self {
        self.property = Some(PropertySelector::IsA);
        self
    }

    pub fn object(mut self, o: &str) -> Self {
        self.object = Some(o.to_string());
        self
    }

    pub fn of_type(mut self, concept: &str) -> Self {
        self.subject_type = Some(concept.to_string());
        self
    }
}

/// Model, instances and provenance-tracked facts.
///
/// Names are matched case-insensitively but kept in declared case. Literal
/// values are never case-folded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    model: CeModel,
    lexicon: Lexicon,
    instances: BTreeMap<String, Instance>,
    instance_order: Vec<String>,
    facts: Vec<Fact>,
    index: BTreeMap<(String, Claim), FactId>,
    counters: BTreeMap<String, u64>,
}

/// Id prefix: initials of the concept's words (`suspect sighting` → `ss`).
pub fn id_prefix(concept: &str) -> String {
    let p: String = concept
        .split_whitespace()
        .filter_map(|w| w.chars().find(|c| c.is_alphabetic()))
        .flat_map(char::to_lowercase)
        .collect();
    if p.is_empty() {
        "x".to_string()
    } else {
        p
    }
}

fn split_counter(id: &str) -> Option<(String, u64)> {
    let folded = id.to_lowercase();
    let digits = folded.len() - folded.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 || digits == folded.len() || digits > 18 {
        return None;
    }
    let (prefix, n) = folded.split_at(folded.len() - digits);
    if !prefix.chars().all(|c| c.is_alphabetic()) {
        return None;
    }
    Some((prefix.to_string(), n.parse().ok()?))
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn model(&self) -> &CeModel {
        &self.model
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    // ---- model ---------------------------------------------------------

    pub fn add_concepts(&mut self, batch: Vec<Concept>) -> Result<(), KernelError> {
        self.model.add_concepts(batch.clone())?;
        for c in batch {
            let name = fold(&c.name);
            self.lexicon.insert(
                Lexicon::surface_of(&name),
                LexEntry {
                    element: Element::Concept { name },
                    via: MatchVia::Name,
                },
            );
        }
        Ok(())
    }

    pub fn add_concept(&mut self, concept: Concept) -> Result<(), KernelError> {
        self.add_concepts(vec![concept])
    }

    pub fn add_property(&mut self, def: PropertyDef) -> Result<(), KernelError> {
        let id = def.id.clone();
        self.model.add_property(def)?;
        self.lexicon.insert(
            Lexicon::surface_of(&id.name),
            LexEntry {
                element: Element::Property { id },
                via: MatchVia::Name,
            },
        );
        Ok(())
    }

    pub fn add_synonym(&mut self, surface: &str, target: SynonymTarget) -> Result<(), KernelError> {
        let words = Lexicon::surface_of(surface);
        if words.is_empty() {
            return Err(KernelError::EmptySurface);
        }
        let target = match target {
            SynonymTarget::Concept(c) => {
                let c = fold(&c);
                if !self.model.has_concept(&c) {
                    return Err(KernelError::UnknownConcept(c));
                }
                SynonymTarget::Concept(c)
            }
            SynonymTarget::Property(p) => {
                if self.model.property(&p).is_none() {
                    return Err(KernelError::UnknownProperty(p.to_string()));
                }
                SynonymTarget::Property(p)
            }
            SynonymTarget::Instance(i) => {
                let inst = self
                    .instance(&i)
                    .ok_or_else(|| KernelError::UnknownInstance(i.clone()))?;
                SynonymTarget::Instance(inst.id.clone())
            }
        };
        let element = match &target {
            SynonymTarget::Concept(name) => Element::Concept { name: name.clone() },
            SynonymTarget::Property(id) => Element::Property { id: id.clone() },
            SynonymTarget::Instance(id) => Element::Instance { id: id.clone() },
        };
        self.lexicon.insert(
            words.clone(),
            LexEntry {
                element,
                via: MatchVia::Synonym,
            },
        );
        self.model.push_synonym(Synonym {
            surface: words,
            target,
        });
        Ok(())
    }

    /// Every model element whose name, label or synonym equals `words`.
    pub fn lookup_surface<S: AsRef<str>>(&self, words: &[S]) -> BTreeSet<LexEntry> {
        let folded: Vec<String> = words.iter().map(|w| normalize_word(w.as_ref())).collect();
        self.lexicon.lookup(&folded)
    }

    // ---- instances -----------------------------------------------------

    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.get(&id.to_lowercase())
    }

    pub fn contains_instance(&self, id: &str) -> bool {
        self.instances.contains_key(&id.to_lowercase())
    }

    /// Instances in creation order.
    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instance_order.iter().map(move |k| &self.instances[k])
    }

    /// Creates `id` as a `concept` unless it already exists as one (or as a
    /// subtype). Returns whether the instance was created.
    pub fn declare_instance(
        &mut self,
        id: &str,
        concept: &str,
        origin: Provenance,
    ) -> Result<bool, KernelError> {
        let concept = fold(concept);
        if id.trim().is_empty() {
            return Err(KernelError::EmptyName);
        }
        if !self.model.has_concept(&concept) {
            return Err(KernelError::UnknownConcept(concept));
        }
        if let Some(existing) = self.instance(id) {
            if self.is_a(&existing.id, &concept) {
                return Ok(false);
            }
            return Err(KernelError::InstanceConflict {
                id: existing.id.clone(),
                existing: existing.concept.clone(),
                requested: concept,
            });
        }
        self.check_premises(&origin)?;
        let key = id.to_lowercase();
        let inst = Instance {
            id: id.to_string(),
            concept,
            label: None,
            description: None,
            origin,
        };
        self.lexicon.insert(
            Lexicon::surface_of(id),
            LexEntry {
                element: Element::Instance { id: inst.id.clone() },
                via: MatchVia::Name,
            },
        );
        self.note_id(id);
        self.instances.insert(key.clone(), inst);
        self.instance_order.push(key);
        Ok(true)
    }

    pub fn set_label(&mut self, id: &str, label: &str) -> Result<(), KernelError> {
        let key = id.to_lowercase();
        let inst = self
            .instances
            .get_mut(&key)
            .ok_or_else(|| KernelError::UnknownInstance(id.to_string()))?;
        if inst.label.as_deref() == Some(label) {
            return Ok(());
        }
        inst.label = Some(label.to_string());
        let element = Element::Instance { id: inst.id.clone() };
        self.lexicon.insert(
            Lexicon::surface_of(label),
            LexEntry {
                element,
                via: MatchVia::Name,
            },
        );
        Ok(())
    }

    pub fn set_description(&mut self, id: &str, description: &str) -> Result<(), KernelError> {
        let inst = self
            .instances
            .get_mut(&id.to_lowercase())
            .ok_or_else(|| KernelError::UnknownInstance(id.to_string()))?;
        inst.description = Some(description.to_string());
        Ok(())
    }

    /// The instance's own concept plus every concept asserted with "is a".
    pub fn types_of(&self, id: &str) -> BTreeSet<String> {
        let mut types = BTreeSet::new();
        if let Some(inst) = self.instance(id) {
            types.insert(inst.concept.clone());
            for fact in self.facts_about(&inst.id) {
                if let Claim::IsA { concept } = &fact.claim {
                    types.insert(concept.clone());
                }
            }
        }
        types
    }

    pub fn is_a(&self, id: &str, concept: &str) -> bool {
        self.types_of(id)
            .iter()
            .any(|t| self.model.is_subtype(t, concept))
    }

    // ---- ids -----------------------------------------------------------

    fn note_id(&mut self, id: &str) {
        if let Some((prefix, n)) = split_counter(id) {
            let c = self.counters.entry(prefix).or_insert(0);
            *c = (*c).max(n);
        }
    }

    /// Next unused id for a concept: initials plus a counter that is one past
    /// the highest ever issued or seen.
    pub fn fresh_id(&mut self, concept: &str) -> Result<String, KernelError> {
        let concept = fold(concept);
        if !self.model.has_concept(&concept) {
            return Err(KernelError::UnknownConcept(concept));
        }
        let prefix = id_prefix(&concept);
        let counter = self.counters.entry(prefix.clone()).or_insert(0);
        loop {
            *counter += 1;
            let id = format!("{prefix}{counter}");
            if !self.instances.contains_key(&id) {
                return Ok(id);
            }
        }
    }

    pub fn counters(&self) -> &BTreeMap<String, u64> {
        &self.counters
    }

    pub fn bump_counter(&mut self, prefix: &str, value: u64) {
        let c = self.counters.entry(prefix.to_lowercase()).or_insert(0);
        *c = (*c).max(value);
    }

    // ---- facts ---------------------------------------------------------

    fn check_premises(&self, provenance: &Provenance) -> Result<(), KernelError> {
        if let Provenance::Inferred { premises, .. } = provenance {
            for p in premises {
                if self.fact(*p).is_none() {
                    return Err(KernelError::MissingPremise(*p));
                }
            }
        }
        Ok(())
    }

    /// Checks a claim against the model and returns it in canonical form
    /// (stored instance ids, folded concept names).
    pub fn validate(&self, subject: &str, claim: &Claim) -> Result<(String, Claim), KernelError> {
        let inst = self
            .instance(subject)
            .ok_or_else(|| KernelError::UnknownInstance(subject.to_string()))?;
        let subject = inst.id.clone();
        let claim = match claim {
            Claim::IsA { concept } => {
                let concept = fold(concept);
                if !self.model.has_concept(&concept) {
                    return Err(KernelError::UnknownConcept(concept));
                }
                Claim::IsA { concept }
            }
            Claim::Property { property, value } => {
                if self.model.property(property).is_none() {
                    return Err(KernelError::UnknownProperty(property.to_string()));
                }
                if !self.is_a(&subject, &property.domain) {
                    return Err(KernelError::DomainViolation {
                        property: property.to_string(),
                        subject,
                    });
                }
                let value = match (&property.range, value) {
                    (PropertyRange::Value, Value::Literal(s)) => Value::Literal(s.clone()),
                    (PropertyRange::Concept(range), Value::Instance(id)) => {
                        let target = self.instance(id).ok_or_else(|| KernelError::UnknownInstance(id.clone()))?;
                        if !self.is_a(&target.id, range) {
                            return Err(KernelError::RangeViolation {
                                property: property.to_string(),
                                value: id.clone(),
                            });
                        }
                        Value::Instance(target.id.clone())
                    }
                    (_, v) => {
                        return Err(KernelError::RangeViolation {
                            property: property.to_string(),
                            value: v.to_string(),
                        })
                    }
                };
                Claim::Property {
                    property: property.clone(),
                    value,
                }
            }
        };
        Ok((subject, claim))
    }

    /// Stores a fact. Re-asserting an existing triple returns the existing id
    /// and leaves the knowledge base unchanged.
    pub fn assert_fact(
        &mut self,
        subject: &str,
        claim: Claim,
        provenance: Provenance,
    ) -> Result<FactId, KernelError> {
        let (subject, claim) = self.validate(subject, &claim)?;
        if let Some(id) = self.index.get(&(subject.clone(), claim.clone())) {
            return Ok(*id);
        }
        self.check_premises(&provenance)?;
        let id = FactId(self.facts.len() as u64 + 1);
        self.index.insert((subject.clone(), claim.clone()), id);
        self.facts.push(Fact {
            id,
            subject,
            claim,
            provenance,
        });
        Ok(id)
    }

    /// Whether the exact triple is stored.
    pub fn find(&self, subject: &str, claim: &Claim) -> Option<FactId> {
        let (subject, claim) = self.validate(subject, claim).ok()?;
        self.index.get(&(subject, claim)).copied()
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        let idx = id.0.checked_sub(1)? as usize;
        self.facts.get(idx)
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn facts_about<'a>(&'a self, subject: &str) -> impl Iterator<Item = &'a Fact> + 'a {
        let key = subject.to_lowercase();
        self.facts.iter().filter(move |f| f.subject.to_lowercase() == key)
    }

    /// Values of a named property on a subject, oldest first.
    pub fn values<'a>(&'a self, subject: &str, property: &str) -> Vec<&'a Value> {
        let name = fold(property);
        self.facts_about(subject)
            .filter_map(|f| match &f.claim {
                Claim::Property { property, value } if property.name == name => Some(value),
                _ => None,
            })
            .collect()
    }

    /// Facts matching every bound element of the pattern.
    pub fn query(&self, pattern: &FactPattern) -> Vec<&Fact> {
        self.facts
            .iter()
            .filter(|f| self.matches(f, pattern))
            .collect()
    }

    fn matches(&self, fact: &Fact, pattern: &FactPattern) -> bool {
        if let Some(s) = &pattern.subject {
            if s.to_lowercase() != fact.subject.to_lowercase() {
                return false;
            }
        }
        if let Some(t) = &pattern.subject_type {
            if !self.is_a(&fact.subject, t) {
                return false;
            }
        }
        if let Some(sel) = &pattern.property {
            let ok = match (sel, &fact.claim) {
                (PropertySelector::IsA, Claim::IsA { .. }) => true,
                (PropertySelector::Name(n), Claim::Property { property, .. }) => property.name == fold(n),
                (PropertySelector::Id(id), Claim::Property { property, .. }) => property == id,
                _ => false,
            };
            if !ok {
                return false;
            }
        }
        if let Some(o) = &pattern.object {
            let ok = match &fact.claim {
                Claim::IsA { concept } => fold(o) == *concept,
                Claim::Property { value: Value::Literal(l), .. } => l == o,
                Claim::Property { value: Value::Instance(i), .. } => i.to_lowercase() == o.to_lowercase(),
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2014, 6, 1, 10, 0, 0).unwrap()
    }

    fn told() -> Provenance {
        Provenance::told("Border Patrol", t0())
    }

    fn small_kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.add_concepts(vec![
            Concept::new("vehicle"),
            Concept::new("colour"),
            Concept::new("person"),
            Concept::new("suspect sighting"),
        ])
        .unwrap();
        kb.add_property(PropertyDef::has("vehicle", "registration", PropertyRange::Value))
            .unwrap();
        kb.add_property(PropertyDef::has(
            "vehicle",
            "colour",
            PropertyRange::Concept("colour".into()),
        ))
        .unwrap();
        kb.declare_instance("black", "colour", told()).unwrap();
        kb.declare_instance("v48", "vehicle", told()).unwrap();
        kb
    }

    fn reg(v: &str) -> Claim {
        Claim::Property {
            property: "vehicle:registration:value".parse().unwrap(),
            value: Value::Literal(v.into()),
        }
    }

    #[test]
    fn fresh_ids_start_at_one_and_increase() {
        let mut kb = small_kb();
        assert_eq!(kb.fresh_id("person").unwrap(), "p1");
        assert_eq!(kb.fresh_id("person").unwrap(), "p2");
        assert_eq!(kb.fresh_id("suspect sighting").unwrap(), "ss1");
    }

    #[test]
    fn fresh_id_continues_after_existing_suffixes() {
        let mut kb = small_kb();
        for id in ["p1", "p2", "p3"] {
            kb.declare_instance(id, "person", told()).unwrap();
        }
        assert_eq!(kb.fresh_id("person").unwrap(), "p4");
        // v48 was declared, so the next vehicle is v49
        assert_eq!(kb.fresh_id("vehicle").unwrap(), "v49");
    }

    #[test]
    fn assert_is_idempotent() {
        let mut kb = small_kb();
        let a = kb.assert_fact("v48", reg("DEF456"), told()).unwrap();
        let b = kb.assert_fact("V48", reg("DEF456"), told()).unwrap();
        assert_eq!(a, b);
        assert_eq!(kb.facts().len(), 1);
        // literal case is significant
        kb.assert_fact("v48", reg("def456"), told()).unwrap();
        assert_eq!(kb.facts().len(), 2);
    }

    #[test]
    fn domain_violation_names_property() {
        let mut kb = small_kb();
        let err = kb.assert_fact("black", reg("X"), told()).unwrap_err();
        match err {
            KernelError::DomainViolation { property, subject } => {
                assert_eq!(property, "vehicle:registration:value");
                assert_eq!(subject, "black");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn range_violation() {
        let mut kb = small_kb();
        let colour: PropertyId = "vehicle:colour:colour".parse().unwrap();
        let bad = Claim::Property {
            property: colour.clone(),
            value: Value::Literal("black".into()),
        };
        assert!(matches!(
            kb.assert_fact("v48", bad, told()),
            Err(KernelError::RangeViolation { .. })
        ));
        let wrong_type = Claim::Property {
            property: colour,
            value: Value::Instance("v48".into()),
        };
        assert!(kb.assert_fact("v48", wrong_type, told()).is_err());
    }

    #[test]
    fn query_by_object() {
        let mut kb = small_kb();
        let id = kb.assert_fact("v48", reg("DEF456"), told()).unwrap();
        let hits = kb.query(&FactPattern::any().property("registration").object("DEF456"));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].id, id);
        assert_eq!(kb.query(&FactPattern::any()).len(), 1);
        assert!(kb.query(&FactPattern::any().object("def456")).is_empty());
    }

    #[test]
    fn missing_premise_rejected() {
        let mut kb = small_kb();
        let prov = Provenance::Inferred {
            rule: "r".into(),
            premises: vec![FactId(9)],
        };
        assert!(matches!(
            kb.assert_fact("v48", reg("A"), prov),
            Err(KernelError::MissingPremise(_))
        ));
    }

    #[test]
    fn instance_conflict() {
        let mut kb = small_kb();
        assert!(!kb.declare_instance("v48", "vehicle", told()).unwrap());
        assert!(matches!(
            kb.declare_instance("v48", "person", told()),
            Err(KernelError::InstanceConflict { .. })
        ));
    }

    #[test]
    fn fact_id_text() {
        assert_eq!(FactId(12).to_string(), "f12");
        assert_eq!("f12".parse::<FactId>().unwrap(), FactId(12));
        assert!("12".parse::<FactId>().is_err());
    }
}
