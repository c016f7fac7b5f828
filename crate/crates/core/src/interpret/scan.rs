use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kernel::{Element, KnowledgeBase, LexEntry, MatchVia, PropertyRange};

use super::tokenize::Sentence;

/// A run of words recognised as a model element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSpan {
    /// Index of the sentence within the whole input.
    pub sentence: usize,
    pub clause: usize,
    /// First word, counted across the sentence's clauses.
    pub start: usize,
    pub len: usize,
    pub text: String,
    pub element: Element,
    pub via: MatchVia,
}

impl MatchSpan {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Lexicon entries for a word sequence, minus has-properties named after
/// their own range concept when that concept is also a match: in
/// "has the colour black as colour" the word `colour` denotes the concept.
pub fn candidates<S: AsRef<str>>(kb: &KnowledgeBase, words: &[S]) -> BTreeSet<LexEntry> {
    let mut found = kb.lookup_surface(words);
    let concepts: BTreeSet<String> = found
        .iter()
        .filter_map(|e| match &e.element {
            Element::Concept { name } => Some(name.clone()),
            _ => None,
        })
        .collect();
    found.retain(|e| match &e.element {
        Element::Property { id } => match &id.range {
            PropertyRange::Concept(r) => !(r == &id.name && concepts.contains(r)),
            PropertyRange::Value => true,
        },
        _ => true,
    });
    found
}

/// Greedy left-to-right longest match within each clause. Among entries for
/// the winning surface, instances beat properties beat concepts.
pub fn scan(kb: &KnowledgeBase, sentence: &Sentence, sentence_index: usize, max_lookahead: usize) -> Vec<MatchSpan> {
    let mut spans = Vec::new();
    let mut offset = 0;
    for (ci, clause) in sentence.clauses.iter().enumerate() {
        let folded: Vec<&str> = clause.words.iter().map(|w| w.folded.as_str()).collect();
        let mut i = 0;
        while i < folded.len() {
            let longest = max_lookahead.min(folded.len() - i);
            let hit = (1..=longest)
                .rev()
                .find_map(|n| candidates(kb, &folded[i..i + n]).into_iter().next().map(|e| (n, e)));
            match hit {
                Some((n, entry)) => {
                    let text: Vec<&str> = clause.words[i..i + n].iter().map(|w| w.text.as_str()).collect();
                    spans.push(MatchSpan {
                        sentence: sentence_index,
                        clause: ci,
                        start: offset + i,
                        len: n,
                        text: text.join(" "),
                        element: entry.element,
                        via: entry.via,
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        offset += clause.words.len();
    }
    spans
}
