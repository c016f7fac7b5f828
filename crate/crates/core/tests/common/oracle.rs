//! Independent checks on interpreter output: the longest-match rule, span
//! bookkeeping and a recount of the score.

use proptest::prelude::*;

use moira_core::bundled::{model_provenance, moira_kb};
use moira_core::ce::{assert_statements, Clause, ClauseValue};
use moira_core::interpret::{interpret, Interpretation, DEFAULT_MAX_LOOKAHEAD};
use moira_core::kernel::{Element, KnowledgeBase};

/// Recounts the score from the spans and the statements alone. Concept and
/// instance mentions always count. A property mention counts when it can
/// claim a clause of its own name whose subject and value both come from its
/// sentence: the word beside it, an instance mentioned in the sentence, or an
/// instance minted from the sentence's text.
pub fn recount(out: &Interpretation) -> u32 {
    let mut clauses: Vec<(&str, &str, &ClauseValue)> = Vec::new();
    for st in &out.statements {
        let (_, subject) = st.subject().expect("interpretations make instance statements");
        for c in st.clauses() {
            if let Clause::Property { name, value, .. } = c {
                clauses.push((subject, name, value));
            }
        }
    }
    let sentences: Vec<Vec<(usize, &str)>> = out
        .input
        .sentences()
        .map(|s| s.words().map(|(c, w)| (c, w.text.as_str())).collect())
        .collect();
    let mut claimed = vec![false; clauses.len()];
    let mut score = 0;
    for span in &out.spans {
        let Element::Property { id } = &span.element else {
            score += 1;
            continue;
        };
        let words = &sentences[span.sentence];
        let beside = |t: &str| {
            let at = |p: usize| words.get(p) == Some(&(span.clause, t));
            at(span.end()) || span.start.checked_sub(1).is_some_and(at)
        };
        let text: Vec<&str> = words.iter().map(|(_, w)| *w).collect();
        let in_sentence = |i: &str| {
            out.spans.iter().any(|o| {
                o.sentence == span.sentence && matches!(&o.element, Element::Instance { id } if id.eq_ignore_ascii_case(i))
            }) || out
                .new_instances
                .iter()
                .any(|n| n.id == i && n.sentence == span.sentence && text.join(" ").contains(&n.description))
        };
        let fits = |(subject, name, value): &(&str, &str, &ClauseValue)| {
            *name == id.name
                && in_sentence(subject)
                && match value {
                    ClauseValue::Literal { text } => beside(text),
                    ClauseValue::Instance { id, .. } => in_sentence(id),
                }
        };
        if let Some(k) = (0..clauses.len()).find(|&k| !claimed[k] && fits(&clauses[k])) {
            claimed[k] = true;
            score += 1;
        }
    }
    score
}

/// Checks one input against every interpreter invariant.
pub fn check(kb: &KnowledgeBase, text: &str) -> Result<Interpretation, String> {
    let out = interpret(kb, text);
    let input = &out.input;
    let words: usize = input.sentences().map(|s| s.word_count()).sum();
    if words != input.word_count() || input.sentences().count() != input.sentence_count() {
        return Err("token counts disagree with the token lists".into());
    }

    let mut uncovered_words = Vec::new();
    for (si, sentence) in input.sentences().enumerate() {
        let folded: Vec<&str> = sentence.words().map(|(_, w)| w.folded.as_str()).collect();
        // clause index → [start, end) in sentence word positions
        let mut bounds = Vec::new();
        let mut at = 0;
        for c in &sentence.clauses {
            bounds.push((at, at + c.words.len()));
            at += c.words.len();
        }
        let spans: Vec<_> = out.spans.iter().filter(|s| s.sentence == si).collect();
        let mut covered = vec![false; folded.len()];
        for s in &spans {
            let (start, end) = bounds[s.clause];
            if s.start < start || s.end() > end || s.len == 0 {
                return Err(format!("span '{}' leaves its clause", s.text));
            }
            if covered[s.start..s.end()].iter().any(|c| *c) {
                return Err(format!("span '{}' overlaps another", s.text));
            }
            covered[s.start..s.end()].iter_mut().for_each(|c| *c = true);
            let resolves = match &s.element {
                Element::Concept { name } => kb.model().has_concept(name),
                Element::Instance { id } => kb.contains_instance(id),
                Element::Property { id } => kb.model().property(id).is_some(),
            };
            if !resolves {
                return Err(format!("span '{}' names nothing in the KB", s.text));
            }
            let longest = DEFAULT_MAX_LOOKAHEAD.min(end - s.start);
            for n in s.len + 1..=longest {
                if !kb.lookup_surface(&folded[s.start..s.start + n]).is_empty() {
                    return Err(format!("'{}' matched although {n} words from there also match", s.text));
                }
            }
        }
        for (ci, &(start, end)) in bounds.iter().enumerate() {
            for p in start..end {
                if covered[p] {
                    continue;
                }
                uncovered_words.push(sentence.clauses[ci].words[p - start].text.clone());
                for n in 1..=DEFAULT_MAX_LOOKAHEAD.min(end - p) {
                    if !kb.lookup_surface(&folded[p..p + n]).is_empty() {
                        return Err(format!("no span at '{}' although the lexicon matches there", folded[p]));
                    }
                }
            }
        }
    }

    for w in &out.unmatched_words {
        match uncovered_words.iter().position(|u| u == w) {
            Some(i) => {
                uncovered_words.remove(i);
            }
            None => return Err(format!("unmatched word '{w}' sits inside a span")),
        }
    }
    if out.score as usize > out.spans.len() {
        return Err("score exceeds the number of matches".into());
    }
    let expected = recount(&out);
    if out.score != expected {
        return Err(format!("score {} but recount gives {expected}", out.score));
    }
    let mut scratch = kb.clone();
    assert_statements(&mut scratch, &out.statements, &model_provenance())
        .map_err(|e| format!("statements do not type-check: {e}\n{}", out.ce()))?;
    Ok(out)
}

pub const FILLERS: &[&str] = &[
    "the", "a", "an", "is", "with", "near", "suspicious", "quickly", "and", "of", "seen", "two", "its", "Fred",
    "Jane", "DEF456", "QRS321", "named", "there", "that", "has", "as", "Ünïcode", "12:30", "3.5",
];
pub const PUNCT: &[&str] = &["", "", "", "", ",", ";", ":", ".", "!", "?"];

pub fn vocabulary() -> Vec<String> {
    let kb = moira_kb();
    let mut words: Vec<String> = kb.lexicon().surfaces().map(|(s, _)| s.join(" ")).collect();
    words.extend(FILLERS.iter().map(|s| s.to_string()));
    words
}

pub fn sentence() -> impl Strategy<Value = String> {
    let vocab = vocabulary();
    prop::collection::vec((prop::sample::select(vocab), prop::sample::select(PUNCT), any::<bool>()), 1..16).prop_map(
        |parts| {
            parts
                .into_iter()
                .map(|(w, p, cap)| {
                    let w = if cap { capitalise(&w) } else { w };
                    format!("{w}{p}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        },
    )
}

pub fn capitalise(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
