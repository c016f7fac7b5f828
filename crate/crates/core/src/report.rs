//! Interpreting a batch of submissions and summarising them.
//!
//! Each row is one submission; the aggregate block gives max, min, mean and
//! median of phrases, sentences, clauses, words and score across the rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::interpret::{IdPool, Interpreter};
use crate::kernel::KnowledgeBase;
use crate::SummaryStats;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub input: String,
    pub ce: String,
    pub score: u32,
    pub unmatched: Vec<String>,
    pub phrases: usize,
    pub sentences: usize,
    pub clauses: usize,
    pub words: usize,
}

impl ReportRow {
    fn measure(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::Phrases => self.phrases as f64,
            Statistic::Sentences => self.sentences as f64,
            Statistic::Clauses => self.clauses as f64,
            Statistic::Words => self.words as f64,
            Statistic::Score => f64::from(self.score),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Statistic {
    Phrases,
    Sentences,
    Clauses,
    Words,
    Score,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::Phrases,
        Statistic::Sentences,
        Statistic::Clauses,
        Statistic::Words,
        Statistic::Score,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Phrases => "Phrases",
            Statistic::Sentences => "Sentences",
            Statistic::Clauses => "Clauses",
            Statistic::Words => "Words",
            Statistic::Score => "Score",
        }
    }
}

/// One line of the aggregate block; `summary` is `None` when there are no
/// rows to summarise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub statistic: Statistic,
    pub summary: Option<SummaryStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<Aggregate>,
}

impl RunReport {
    /// Interprets each non-blank line as one submission. Ids come from a
    /// pool that starts afresh for every run, so the same inputs always
    /// give the same report.
    pub fn interpret<'a, I>(kb: &KnowledgeBase, interpreter: &Interpreter, inputs: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut pool = IdPool::new();
        let rows = inputs
            .into_iter()
            .map(str::trim)
            .filter(|line| !line.is_empty())
            .map(|line| {
                let out = interpreter.interpret_with(kb, line, &mut pool);
                ReportRow {
                    input: line.to_string(),
                    ce: out.ce(),
                    score: out.score,
                    unmatched: out.unmatched_words.clone(),
                    phrases: out.input.phrase_count(),
                    sentences: out.input.sentence_count(),
                    clauses: out.input.clause_count(),
                    words: out.input.word_count(),
                }
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<ReportRow>) -> Self {
        let aggregates = Statistic::ALL
            .iter()
            .map(|&statistic| Aggregate {
                statistic,
                summary: SummaryStats::of(rows.iter().map(|r| r.measure(statistic))),
            })
            .collect();
        RunReport { rows, aggregates }
    }

    pub fn aggregate(&self, statistic: Statistic) -> Option<&SummaryStats> {
        self.aggregates
            .iter()
            .find(|a| a.statistic == statistic)
            .and_then(|a| a.summary.as_ref())
    }

    /// Whether the aggregate block agrees with the rows.
    pub fn is_consistent(&self) -> bool {
        Self::from_rows(self.rows.clone()).aggregates == self.aggregates
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            let _ = writeln!(out, "[{}] {}", i + 1, row.input);
            let _ = writeln!(out, "  score: {}", row.score);
            for line in row.ce.lines() {
                let _ = writeln!(out, "  {line}");
            }
            if !row.unmatched.is_empty() {
                let _ = writeln!(out, "  unmatched: {}", row.unmatched.join(" "));
            }
        }
        if !self.rows.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "{:<10} {:>6} {:>6} {:>8} {:>7}", "", "Max", "Min", "Mean", "Median");
        for a in &self.aggregates {
            let name = a.statistic.name();
            match &a.summary {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        "{name:<10} {:>6} {:>6} {:>8.2} {:>7}",
                        s.max, s.min, s.mean, s.median
                    );
                }
                None => {
                    let _ = writeln!(out, "{name:<10} {:>6} {:>6} {:>8} {:>7}", "-", "-", "-", "-");
                }
            }
        }
        out
    }
}
