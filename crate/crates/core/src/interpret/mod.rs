//! Bag-of-words interpretation of natural-language reports into CE.
//!
//! Input is split into phrases, sentences, clauses and words; each sentence
//! is scanned left to right for the longest word run naming a concept,
//! instance or property (directly or through a synonym), and the matches are
//! assembled into CE statements using property domains and ranges. The score
//! is one point per match that ended up in an emitted statement.

mod assemble;
mod scan;
mod tokenize;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ce::{render_statements, CeStatement};
use crate::kernel::{fold, KnowledgeBase};

pub use scan::{candidates, scan, MatchSpan};
pub use tokenize::{tokenize, ClauseWords, Phrase, Sentence, TokenizedInput, Word};

use assemble::Assembler;

/// Longest surface the scanner tries, in words.
pub const DEFAULT_MAX_LOOKAHEAD: usize = 4;

/// An instance minted while interpreting, with the text it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewInstance {
    pub id: String,
    pub concept: String,
    pub description: String,
    /// The sentence whose text introduced it.
    pub sentence: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub input: TokenizedInput,
    pub spans: Vec<MatchSpan>,
    /// Parallel to `spans`: whether the match contributed to a statement.
    pub contributing: Vec<bool>,
    pub statements: Vec<CeStatement>,
    pub new_instances: Vec<NewInstance>,
    pub score: u32,
    pub unmatched_words: Vec<String>,
}

impl Interpretation {
    /// Canonical CE, one statement per line.
    pub fn ce(&self) -> String {
        render_statements(&self.statements)
    }
}

/// Fresh-id allocation that does not touch the knowledge base. Ids are
/// one past the highest counter seen in the KB or issued by this pool.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdPool {
    issued: BTreeMap<String, u64>,
}

impl IdPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, kb: &KnowledgeBase, concept: &str) -> String {
        let prefix = crate::kernel::id_prefix(&fold(concept));
        let floor = kb.counters().get(&prefix).copied().unwrap_or(0);
        let counter = self.issued.entry(prefix.clone()).or_insert(0);
        *counter = (*counter).max(floor);
        loop {
            *counter += 1;
            let id = format!("{prefix}{counter}");
            if !kb.contains_instance(&id) {
                return id;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interpreter {
    pub max_lookahead: usize,
}

impl Default for Interpreter {
    fn default() -> Self {
        Interpreter {
            max_lookahead: DEFAULT_MAX_LOOKAHEAD,
        }
    }
}

impl Interpreter {
    pub fn new(max_lookahead: usize) -> Self {
        Interpreter {
            max_lookahead: max_lookahead.max(1),
        }
    }

    /// Interprets with ids allocated from the knowledge base's counters.
    pub fn interpret(&self, kb: &KnowledgeBase, text: &str) -> Interpretation {
        self.interpret_with(kb, text, &mut IdPool::new())
    }

    /// Interprets with ids drawn from a caller-owned pool, so concurrent
    /// interpretations never hand out the same id.
    pub fn interpret_with(&self, kb: &KnowledgeBase, text: &str, pool: &mut IdPool) -> Interpretation {
        let input = tokenize(text);
        let per_sentence: Vec<Vec<MatchSpan>> = input
            .sentences()
            .enumerate()
            .map(|(i, s)| scan(kb, s, i, self.max_lookahead))
            .collect();
        let total: usize = per_sentence.iter().map(Vec::len).sum();

        let mut asm = Assembler::new(kb, pool, total);
        let mut first = 0;
        for ((i, sentence), spans) in input.sentences().enumerate().zip(&per_sentence) {
            asm.sentence(i, sentence, spans, first);
            first += spans.len();
        }
        let contributing = asm.contributed.clone();
        let new_instances = asm.new_instances.clone();
        let consumed = asm.consumed_words.clone();
        let statements = asm.finish();

        let mut unmatched_words = Vec::new();
        for ((i, sentence), spans) in input.sentences().enumerate().zip(&per_sentence) {
            for (pos, (_, w)) in sentence.words().enumerate() {
                let in_span = spans.iter().any(|s| pos >= s.start && pos < s.end());
                if !in_span && !consumed.contains(&(i, pos)) {
                    unmatched_words.push(w.text.clone());
                }
            }
        }
        let spans: Vec<MatchSpan> = per_sentence.into_iter().flatten().collect();
        let score = contributing.iter().filter(|c| **c).count() as u32;
        Interpretation {
            input,
            spans,
            contributing,
            statements,
            new_instances,
            score,
            unmatched_words,
        }
    }
}

/// Interprets `text` with the default lookahead.
pub fn interpret(kb: &KnowledgeBase, text: &str) -> Interpretation {
    Interpreter::default().interpret(kb, text)
}
