use serde::{Deserialize, Serialize};

use crate::kernel::normalize_word;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    /// Text with leading/trailing punctuation removed, original case.
    pub text: String,
    /// Case-folded form used for lookup.
    pub folded: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseWords {
    pub words: Vec<Word>,
    /// `,` `;` or `:` that closed the clause, if any.
    pub separator: Option<char>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub clauses: Vec<ClauseWords>,
    /// `.` `!` or `?` that closed the sentence, if any.
    pub terminator: Option<char>,
}

impl Sentence {
    /// All words in order, paired with their clause index.
    pub fn words(&self) -> impl Iterator<Item = (usize, &Word)> {
        self.clauses
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.words.iter().map(move |w| (ci, w)))
    }

    pub fn word_count(&self) -> usize {
        self.clauses.iter().map(|c| c.words.len()).sum()
    }
}

/// A line of input holding one or more sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phrase {
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedInput {
    pub phrases: Vec<Phrase>,
}

impl TokenizedInput {
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.phrases.iter().flat_map(|p| p.sentences.iter())
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences().count()
    }

    pub fn clause_count(&self) -> usize {
        self.sentences().map(|s| s.clauses.len()).sum()
    }

    pub fn word_count(&self) -> usize {
        self.sentences().map(Sentence::word_count).sum()
    }

    /// Words joined by single spaces with their separators; tokenizing the
    /// result gives back the same structure.
    pub fn normalized(&self) -> String {
        let mut lines = Vec::new();
        for p in &self.phrases {
            let mut sentences = Vec::new();
            for s in &p.sentences {
                let mut text = String::new();
                for (i, c) in s.clauses.iter().enumerate() {
                    if i > 0 {
                        text.push(' ');
                    }
                    let words: Vec<&str> = c.words.iter().map(|w| w.text.as_str()).collect();
                    text.push_str(&words.join(" "));
                    if let Some(sep) = c.separator {
                        text.push(sep);
                    }
                }
                if let Some(t) = s.terminator {
                    text.push(t);
                }
                sentences.push(text);
            }
            lines.push(sentences.join(" "));
        }
        lines.join("\n")
    }
}

fn is_sentence_end(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_clause_sep(c: char) -> bool {
    matches!(c, ',' | ';' | ':')
}

fn trim_word(raw: &str) -> &str {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Splits input into phrases (lines), sentences, clauses and words.
///
/// Punctuation separates only when followed by whitespace or the end of the
/// line, so `3.5`, `12:30` and `a,b` stay single words.
pub fn tokenize(text: &str) -> TokenizedInput {
    let mut phrases = Vec::new();
    for line in text.lines() {
        let chars: Vec<char> = line.chars().collect();
        let mut sentences = Vec::new();
        let mut clauses: Vec<ClauseWords> = Vec::new();
        let mut words: Vec<Word> = Vec::new();
        let mut raw = String::new();

        let flush_word = |raw: &mut String, words: &mut Vec<Word>| {
            let t = trim_word(raw);
            if !t.is_empty() {
                words.push(Word {
                    text: t.to_string(),
                    folded: normalize_word(t),
                });
            }
            raw.clear();
        };

        for (i, &c) in chars.iter().enumerate() {
            let boundary = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
            if c.is_whitespace() {
                flush_word(&mut raw, &mut words);
            } else if boundary && is_clause_sep(c) {
                flush_word(&mut raw, &mut words);
                if !words.is_empty() {
                    clauses.push(ClauseWords {
                        words: std::mem::take(&mut words),
                        separator: Some(c),
                    });
                }
            } else if boundary && is_sentence_end(c) {
                flush_word(&mut raw, &mut words);
                if !words.is_empty() {
                    clauses.push(ClauseWords {
                        words: std::mem::take(&mut words),
                        separator: None,
                    });
                }
                if !clauses.is_empty() {
                    sentences.push(Sentence {
                        clauses: std::mem::take(&mut clauses),
                        terminator: Some(c),
                    });
                }
            } else {
                raw.push(c);
            }
        }
        flush_word(&mut raw, &mut words);
        if !words.is_empty() {
            clauses.push(ClauseWords {
                words,
                separator: None,
            });
        }
        if !clauses.is_empty() {
            sentences.push(Sentence {
                clauses,
                terminator: None,
            });
        }
        if !sentences.is_empty() {
            phrases.push(Phrase { sentences });
        }
    }
    TokenizedInput { phrases }
}
