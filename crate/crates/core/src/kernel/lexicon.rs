use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::PropertyId;

/// Strips leading and trailing punctuation and case-folds a word.
pub fn normalize_word(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// A model element a surface form can denote.
///
/// Variant order is the tie-break order when one surface maps to several
/// kinds: instance before property before concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    Instance { id: String },
    Property { id: PropertyId },
    Concept { name: String },
}

impl Element {
    pub fn rank(&self) -> u8 {
        match self {
            Element::Instance { .. } => 0,
            Element::Property { .. } => 1,
            Element::Concept { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchVia {
    Name,
    Synonym,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LexEntry {
    pub element: Element,
    pub via: MatchVia,
}

/// Word-sequence index over names, labels and synonyms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<Vec<String>, BTreeSet<LexEntry>>,
    longest: usize,
}

impl Lexicon {
    pub fn surface_of(text: &str) -> Vec<String> {
        text.split_whitespace()
            .map(normalize_word)
            .filter(|w| !w.is_empty())
            .collect()
    }

    pub fn insert(&mut self, surface: Vec<String>, entry: LexEntry) {
        if surface.is_empty() {
            return;
        }
        self.longest = self.longest.max(surface.len());
        self.entries.entry(surface).or_default().insert(entry);
    }

    pub fn remove_element(&mut self, element: &Element) {
        for set in self.entries.values_mut() {
            set.retain(|e| &e.element != element);
        }
        self.entries.retain(|_, s| !s.is_empty());
    }

    /// Exact lookup of a case-folded word sequence.
    pub fn lookup<S: AsRef<str>>(&self, words: &[S]) -> BTreeSet<LexEntry> {
        let key: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
        self.entries.get(&key).cloned().unwrap_or_default()
    }

    pub fn contains<S: AsRef<str>>(&self, words: &[S]) -> bool {
        let key: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
        self.entries.contains_key(&key)
    }

    /// Length in words of the longest surface form.
    pub fn longest(&self) -> usize {
        self.longest
    }

    pub fn surfaces(&self) -> impl Iterator<Item = (&Vec<String>, &BTreeSet<LexEntry>)> {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_strips_outer_punctuation_only() {
        assert_eq!(normalize_word("South:"), "south");
        assert_eq!(normalize_word("'DEF456'"), "def456");
        assert_eq!(normalize_word("it's"), "it's");
        assert_eq!(normalize_word("SS_v48."), "ss_v48");
        assert_eq!(normalize_word("--"), "");
    }

    #[test]
    fn tie_break_order() {
        let i = Element::Instance { id: "x".into() };
        let c = Element::Concept { name: "a".into() };
        assert!(i < c);
    }
}
