//! Ontology: concepts, property definitions and the synonym lexicon.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::KernelError;

/// Case-folds a multi-word name: lowercased, single-spaced.
pub fn fold(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub parents: BTreeSet<String>,
}

impl Concept {
    pub fn new(name: &str) -> Self {
        Concept {
            name: fold(name),
            parents: BTreeSet::new(),
        }
    }

    pub fn with_parent(mut self, parent: &str) -> Self {
        self.parents.insert(fold(parent));
        self
    }
}

/// Range of a property: a literal value (attribute) or a concept (relation).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PropertyRange {
    Value,
    Concept(String),
}

impl fmt::Display for PropertyRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyRange::Value => f.write_str("value"),
            PropertyRange::Concept(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyKind {
    Attribute,
    Relation,
}

/// Surface form a property takes in a sentence.
///
/// `Has` properties read "has X as registration"; `Verb` properties read
/// "is married to X".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PropertyStyle {
    Has,
    Verb,
}

/// Identity of a property, rendered `domain:name:range`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PropertyId {
    pub domain: String,
    pub name: String,
    pub range: PropertyRange,
}

impl PropertyId {
    pub fn new(domain: &str, name: &str, range: PropertyRange) -> Self {
        let range = match range {
            PropertyRange::Value => PropertyRange::Value,
            PropertyRange::Concept(c) => PropertyRange::Concept(fold(&c)),
        };
        PropertyId {
            domain: fold(domain),
            name: fold(name),
            range,
        }
    }

    pub fn kind(&self) -> PropertyKind {
        match self.range {
            PropertyRange::Value => PropertyKind::Attribute,
            PropertyRange::Concept(_) => PropertyKind::Relation,
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.domain, self.name, self.range)
    }
}

impl FromStr for PropertyId {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 || parts.iter().any(|p| p.trim().is_empty()) {
            return Err(KernelError::MalformedPropertyId(s.to_string()));
        }
        let range = match fold(parts[2]).as_str() {
            "value" => PropertyRange::Value,
            other => PropertyRange::Concept(other.to_string()),
        };
        Ok(PropertyId::new(parts[0], parts[1], range))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDef {
    pub id: PropertyId,
    pub style: PropertyStyle,
}

impl PropertyDef {
    pub fn has(domain: &str, name: &str, range: PropertyRange) -> Self {
        PropertyDef {
            id: PropertyId::new(domain, name, range),
            style: PropertyStyle::Has,
        }
    }

    pub fn verb(domain: &str, name: &str, range: &str) -> Self {
        PropertyDef {
            id: PropertyId::new(domain, name, PropertyRange::Concept(range.to_string())),
            style: PropertyStyle::Verb,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SynonymTarget {
    Concept(String),
    Property(PropertyId),
    Instance(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synonym {
    /// Case-folded word sequence.
    pub surface: Vec<String>,
    pub target: SynonymTarget,
}

/// Concepts, properties and synonyms. Instances live in the knowledge base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CeModel {
    concepts: BTreeMap<String, Concept>,
    concept_order: Vec<String>,
    properties: Vec<PropertyDef>,
    synonyms: Vec<Synonym>,
    ancestors: BTreeMap<String, BTreeSet<String>>,
}

impl CeModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concepts.get(&fold(name))
    }

    pub fn has_concept(&self, name: &str) -> bool {
        self.concepts.contains_key(&fold(name))
    }

    /// Concepts in declaration order.
    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concept_order.iter().map(move |n| &self.concepts[n])
    }

    pub fn properties(&self) -> &[PropertyDef] {
        &self.properties
    }

    pub fn synonyms(&self) -> &[Synonym] {
        &self.synonyms
    }

    pub fn property(&self, id: &PropertyId) -> Option<&PropertyDef> {
        self.properties.iter().find(|p| &p.id == id)
    }

    /// Declaration index of a property, used for canonical clause ordering.
    pub fn property_index(&self, id: &PropertyId) -> Option<usize> {
        self.properties.iter().position(|p| &p.id == id)
    }

    pub fn add_concept(&mut self, concept: Concept) -> Result<(), KernelError> {
        self.add_concepts(vec![concept])
    }

    /// Adds a batch of concepts; parents may refer to other members of the
    /// batch. The model is unchanged when any member is rejected.
    pub fn add_concepts(&mut self, batch: Vec<Concept>) -> Result<(), KernelError> {
        let mut next = self.clone();
        for c in &batch {
            let name = fold(&c.name);
            if name.is_empty() {
                return Err(KernelError::EmptyName);
            }
            let parents: BTreeSet<String> = c.parents.iter().map(|p| fold(p)).collect();
            match next.concepts.get_mut(&name) {
                Some(existing) => {
                    // Redeclaring with no parents is a plain reference.
                    if !parents.is_empty() && !existing.parents.is_empty() && existing.parents != parents {
                        return Err(KernelError::ConflictingConcept(name));
                    }
                    if existing.parents.is_empty() {
                        existing.parents = parents;
                    }
                }
                None => {
                    next.concept_order.push(name.clone());
                    next.concepts.insert(name.clone(), Concept { name, parents });
                }
            }
        }
        for c in next.concepts.values() {
            for p in &c.parents {
                if !next.concepts.contains_key(p) {
                    return Err(KernelError::UnknownConcept(p.clone()));
                }
            }
        }
        next.check_acyclic()?;
        next.rebuild_closure();
        *self = next;
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), KernelError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(
            model: &'a CeModel,
            name: &'a str,
            mark: &mut BTreeMap<&'a str, u8>,
        ) -> Result<(), KernelError> {
            match mark.get(name) {
                Some(1) => return Err(KernelError::Cycle(name.to_string())),
                Some(2) => return Ok(()),
                _ => {}
            }
            mark.insert(name, 1);
            for p in &model.concepts[name].parents {
                visit(model, p, mark)?;
            }
            mark.insert(name, 2);
            Ok(())
        }
        for name in self.concepts.keys() {
            visit(self, name, &mut mark)?;
        }
        Ok(())
    }

    fn rebuild_closure(&mut self) {
        let mut closure = BTreeMap::new();
        for name in self.concepts.keys() {
            let mut seen = BTreeSet::new();
            let mut stack = vec![name.clone()];
            while let Some(n) = stack.pop() {
                if seen.insert(n.clone()) {
                    stack.extend(self.concepts[&n].parents.iter().cloned());
                }
            }
            closure.insert(name.clone(), seen);
        }
        self.ancestors = closure;
    }

    /// Reflexive, transitive subtype test. Unknown concepts are only
    /// subtypes of themselves.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let (sub, sup) = (fold(sub), fold(sup));
        if sub == sup {
            return true;
        }
        self.ancestors.get(&sub).is_some_and(|a| a.contains(&sup))
    }

    /// All supertypes of a concept, itself included.
    pub fn ancestors(&self, name: &str) -> BTreeSet<String> {
        let name = fold(name);
        self.ancestors
            .get(&name)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([name]))
    }

    pub fn add_property(&mut self, def: PropertyDef) -> Result<(), KernelError> {
        let id = &def.id;
        if id.name.is_empty() {
            return Err(KernelError::EmptyName);
        }
        if !self.has_concept(&id.domain) {
            return Err(KernelError::UnknownConcept(id.domain.clone()));
        }
        if let PropertyRange::Concept(r) = &id.range {
            if !self.has_concept(r) {
                return Err(KernelError::UnknownConcept(r.clone()));
            }
        }
        if self.property(id).is_none() {
            self.properties.push(def);
        }
        Ok(())
    }

    pub(crate) fn push_synonym(&mut self, synonym: Synonym) {
        if !self.synonyms.contains(&synonym) {
            self.synonyms.push(synonym);
        }
    }

    /// Properties called `name` whose domain covers one of `types`, most
    /// specific domain first, then declaration order.
    pub fn properties_named<'a>(
        &'a self,
        name: &str,
        types: &BTreeSet<String>,
    ) -> Vec<&'a PropertyDef> {
        let name = fold(name);
        let mut found: Vec<&PropertyDef> = self
            .properties
            .iter()
            .filter(|p| p.id.name == name)
            .filter(|p| types.iter().any(|t| self.is_subtype(t, &p.id.domain)))
            .collect();
        // stable: a domain that is a strict subtype of another wins
        found.sort_by_key(|p| {
            std::cmp::Reverse(self.ancestors(&p.id.domain).len())
        });
        found
    }

    /// Properties applicable to an instance carrying `types`.
    pub fn properties_for<'a>(&'a self, types: &BTreeSet<String>) -> Vec<&'a PropertyDef> {
        self.properties
            .iter()
            .filter(|p| types.iter().any(|t| self.is_subtype(t, &p.id.domain)))
            .collect()
    }

    /// Every concept whose name or ancestors include `name`.
    pub fn subtypes_of(&self, name: &str) -> Vec<&str> {
        let name = fold(name);
        self.concept_order
            .iter()
            .filter(|c| self.is_subtype(c, &name))
            .map(String::as_str)
            .collect()
    }
}
