//! Turning matched spans into CE statements.
//!
//! Each sentence keeps a current subject. Concept mentions mint a fresh
//! instance that becomes the subject; instance mentions attach to the subject
//! through a property whose range fits them, or wait until a subject appears.
//! A mention directly in front of a noun ("blue police car") waits for that
//! noun. Properties attach to the subject when their domain covers it and
//! otherwise produce a separate statement about the same instance under the
//! domain concept. Mentions left waiting at the end of a sentence that only
//! one concept can own ("van" is a body type, and only vehicles have one)
//! make an instance of that concept.

use std::collections::{BTreeMap, BTreeSet};

use crate::ce::{order_clauses, CeStatement, Clause, ClauseValue};
use crate::kernel::{fold, Element, KnowledgeBase, PropertyDef, PropertyId, PropertyRange};

use super::scan::{candidates, MatchSpan};
use super::tokenize::{Sentence, Word};
use super::{IdPool, NewInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    /// `there is a C named X that ...`
    New,
    /// `the C X ...`
    Facts,
}

#[derive(Debug, Clone)]
struct Draft {
    form: Form,
    concept: String,
    id: String,
    clauses: Vec<Clause>,
}

impl Draft {
    /// Property clauses come one per contributing mention, repeats included,
    /// so the statements account for the score; type clauses are kept once.
    fn push(&mut self, clause: Clause) {
        if matches!(clause, Clause::Property { .. }) || !self.clauses.contains(&clause) {
            self.clauses.push(clause);
        }
    }

    fn into_statement(mut self, kb: &KnowledgeBase) -> CeStatement {
        order_clauses(kb.model(), &mut self.clauses);
        match self.form {
            Form::New => CeStatement::new_instance(&self.concept, &self.id, self.clauses),
            Form::Facts => CeStatement::instance_facts(&self.concept, &self.id, self.clauses),
        }
    }
}

/// Where a property's value comes from, found before anything is minted.
enum Slot {
    Word(usize),
    Span(usize),
    Named { word: usize, concept: String },
    /// A concept mention later in the clause becomes the value.
    Concept(usize),
    /// Mentions later in the clause imply an instance of `concept`.
    Implied { span: usize, concept: String },
}

pub(crate) struct Assembler<'a> {
    kb: &'a KnowledgeBase,
    pool: &'a mut IdPool,
    /// Types gained during this interpretation, keyed by folded id.
    types: BTreeMap<String, BTreeSet<String>>,
    open: BTreeMap<String, bool>,
    drafts: Vec<Draft>,
    sentence: usize,
    pub new_instances: Vec<NewInstance>,
    pub contributed: Vec<bool>,
    pub consumed_words: BTreeSet<(usize, usize)>,
}

struct SentenceState<'s> {
    index: usize,
    words: Vec<(usize, &'s Word)>,
    covered: Vec<bool>,
    subject: Option<usize>,
    pending: Vec<usize>,
    descriptions: Vec<Draft>,
    /// Clauses made by attaching a mention in this sentence, as (draft,
    /// clause), until a property mention naming them claims them.
    attached: Vec<(usize, usize)>,
}

impl<'a> Assembler<'a> {
    pub fn new(kb: &'a KnowledgeBase, pool: &'a mut IdPool, span_count: usize) -> Self {
        Assembler {
            kb,
            pool,
            types: BTreeMap::new(),
            open: BTreeMap::new(),
            drafts: Vec::new(),
            sentence: 0,
            new_instances: Vec::new(),
            contributed: vec![false; span_count],
            consumed_words: BTreeSet::new(),
        }
    }

    pub fn finish(self) -> Vec<CeStatement> {
        let kb = self.kb;
        self.drafts.into_iter().map(|d| d.into_statement(kb)).collect()
    }

    fn types_of(&self, id: &str) -> BTreeSet<String> {
        let mut t = self.kb.types_of(id);
        if let Some(extra) = self.types.get(&id.to_lowercase()) {
            t.extend(extra.iter().cloned());
        }
        t
    }

    fn is_a(&self, id: &str, concept: &str) -> bool {
        self.types_of(id).iter().any(|t| self.kb.model().is_subtype(t, concept))
    }

    fn primary_concept(&self, id: &str) -> String {
        self.kb
            .instance(id)
            .map(|i| i.concept.clone())
            .or_else(|| self.types.get(&id.to_lowercase()).and_then(|t| t.iter().next().cloned()))
            .unwrap_or_default()
    }

    fn add_type(&mut self, id: &str, concept: &str) {
        self.types.entry(id.to_lowercase()).or_default().insert(fold(concept));
    }

    /// A concept with no instances in the knowledge base: names for it are
    /// taken from the text.
    fn is_open(&mut self, concept: &str) -> bool {
        if let Some(v) = self.open.get(concept) {
            return *v;
        }
        let kb = self.kb;
        let v = !kb.instances().any(|i| kb.is_a(&i.id, concept));
        self.open.insert(concept.to_string(), v);
        v
    }

    fn mint(&mut self, concept: &str, description: &str) -> String {
        let id = self.pool.fresh(self.kb, concept);
        self.add_type(&id, concept);
        self.new_instances.push(NewInstance {
            id: id.clone(),
            concept: concept.to_string(),
            description: description.to_string(),
            sentence: self.sentence,
        });
        id
    }

    fn draft_for(&mut self, form: Form, concept: &str, id: &str) -> usize {
        if let Some(i) = self
            .drafts
            .iter()
            .position(|d| d.concept == concept && d.id.eq_ignore_ascii_case(id))
        {
            return i;
        }
        self.drafts.push(Draft {
            form,
            concept: concept.to_string(),
            id: id.to_string(),
            clauses: Vec::new(),
        });
        self.drafts.len() - 1
    }

    pub fn sentence(&mut self, index: usize, sentence: &Sentence, spans: &[MatchSpan], first_span: usize) {
        self.sentence = index;
        let words: Vec<(usize, &Word)> = sentence.words().collect();
        let mut covered = vec![false; words.len()];
        for s in spans {
            for c in covered.iter_mut().skip(s.start).take(s.len) {
                *c = true;
            }
        }
        let mut st = SentenceState {
            index,
            words,
            covered,
            subject: None,
            pending: Vec::new(),
            descriptions: Vec::new(),
            attached: Vec::new(),
        };
        let mut used = vec![false; spans.len()];
        for si in 0..spans.len() {
            if used[si] {
                continue;
            }
            used[si] = true;
            let span = &spans[si];
            match &span.element {
                Element::Concept { name } => {
                    let id = self.mint(name, &span.text);
                    let d = self.draft_for(Form::New, name, &id);
                    st.subject = Some(d);
                    self.contributed[first_span + si] = true;
                    self.attach_pending(&mut st, spans, first_span);
                }
                Element::Instance { id } => {
                    if self.subject_id(&st).is_some_and(|s| s.eq_ignore_ascii_case(id)) {
                        self.contributed[first_span + si] = true;
                    } else if self.noun_ahead(spans, si) || !self.attach_instance(&mut st, id) {
                        st.pending.push(si);
                    } else {
                        self.contributed[first_span + si] = true;
                    }
                }
                Element::Property { .. } => {
                    self.property(&mut st, spans, si, &mut used, first_span);
                }
            }
        }
        // a waiting mention that only one concept can own implies an
        // instance of it
        while let Some((si, concept)) = st.pending.iter().find_map(|&si| match &spans[si].element {
            Element::Instance { id } => self.owner(id).map(|c| (si, c)),
            _ => None,
        }) {
            let id = self.mint(&concept, &spans[si].text);
            st.subject = Some(self.draft_for(Form::New, &concept, &id));
            self.attach_pending(&mut st, spans, first_span);
            if st.pending.contains(&si) {
                break;
            }
        }
        // instances that never found a home are mentioned on their own
        for si in std::mem::take(&mut st.pending) {
            if let Element::Instance { id } = &spans[si].element {
                let concept = self.primary_concept(id);
                self.draft_for(Form::Facts, &concept, id);
                self.contributed[first_span + si] = true;
            }
        }
        self.drafts.append(&mut st.descriptions);
    }

    fn subject_id(&self, st: &SentenceState) -> Option<String> {
        st.subject.map(|d| self.drafts[d].id.clone())
    }

    /// Attaches an instance to the current subject through the first
    /// property (in model order) whose domain covers the subject and whose
    /// range covers the instance.
    fn attach_instance(&mut self, st: &mut SentenceState, id: &str) -> bool {
        let Some(d) = st.subject else { return false };
        let subject = self.drafts[d].id.clone();
        let subject_types = self.types_of(&subject);
        let kb = self.kb;
        let prop = kb.model().properties().iter().find(|p| {
            subject_types.iter().any(|t| kb.model().is_subtype(t, &p.id.domain))
                && matches!(&p.id.range, PropertyRange::Concept(r) if self.is_a(id, r))
        });
        match prop {
            Some(p) => {
                let clause = Clause::Property {
                    name: p.id.name.clone(),
                    style: p.style,
                    value: ClauseValue::instance(&self.primary_concept(id), &self.kb.instance(id).map(|i| i.id.clone()).unwrap_or_else(|| id.to_string())),
                };
                self.drafts[d].push(clause);
                st.attached.push((d, self.drafts[d].clauses.len() - 1));
                true
            }
            None => false,
        }
    }

    fn attach_pending(&mut self, st: &mut SentenceState, spans: &[MatchSpan], first_span: usize) {
        let pending = std::mem::take(&mut st.pending);
        for si in pending {
            let attached = match &spans[si].element {
                Element::Instance { id } => self.attach_instance(st, id),
                _ => false,
            };
            if attached {
                self.contributed[first_span + si] = true;
            } else {
                st.pending.push(si);
            }
        }
    }

    /// Domains of the properties that could take `id` as their value.
    fn owners(&self, id: &str) -> BTreeSet<String> {
        self.kb
            .model()
            .properties()
            .iter()
            .filter(|p| matches!(&p.id.range, PropertyRange::Concept(r) if self.is_a(id, r)))
            .map(|p| p.id.domain.clone())
            .collect()
    }

    /// The one concept that can own `id`, if there is exactly one.
    fn owner(&self, id: &str) -> Option<String> {
        let owners = self.owners(id);
        match owners.len() {
            1 => owners.into_iter().next(),
            _ => None,
        }
    }

    /// Whether the instance span at `si` runs, through adjacent instance
    /// mentions, straight into a concept that could own it.
    fn noun_ahead(&self, spans: &[MatchSpan], si: usize) -> bool {
        let Element::Instance { id } = &spans[si].element else { return false };
        let mut prev = &spans[si];
        for next in &spans[si + 1..] {
            if next.clause != prev.clause || next.start != prev.end() {
                return false;
            }
            match &next.element {
                Element::Instance { .. } => prev = next,
                Element::Concept { name } => {
                    let model = self.kb.model();
                    return self.owners(id).iter().any(|d| model.is_subtype(name, d));
                }
                Element::Property { .. } => return false,
            }
        }
        false
    }

    fn word_free(&self, st: &SentenceState, pos: usize, clause: usize) -> bool {
        pos < st.words.len()
            && st.words[pos].0 == clause
            && !st.covered[pos]
            && !self.consumed_words.contains(&(st.index, pos))
    }

    fn looks_like_name(w: &Word) -> bool {
        w.text.chars().next().is_some_and(char::is_uppercase)
    }

    /// Words that never stand for a value on their own.
    fn is_function_word(w: &Word) -> bool {
        const FUNCTION_WORDS: &[&str] = &[
            "a", "an", "the", "and", "or", "but", "of", "with", "without", "to", "in", "on", "at", "by", "for",
            "from", "into", "onto", "is", "are", "was", "were", "be", "been", "it", "its", "this", "that", "these",
            "those", "there", "who", "which", "as", "his", "her", "their",
        ];
        FUNCTION_WORDS.contains(&w.folded.as_str())
    }

    fn value_word(&self, st: &SentenceState, pos: usize, clause: usize) -> bool {
        self.word_free(st, pos, clause) && !Self::is_function_word(st.words[pos].1)
    }

    fn find_slot(&mut self, st: &SentenceState, spans: &[MatchSpan], si: usize, used: &[bool], prop: &PropertyDef) -> Option<Slot> {
        let span = &spans[si];
        let before = span.start.checked_sub(1);
        match &prop.id.range {
            PropertyRange::Value => {
                if self.value_word(st, span.end(), span.clause) {
                    Some(Slot::Word(span.end()))
                } else {
                    before.filter(|&b| self.value_word(st, b, span.clause)).map(Slot::Word)
                }
            }
            PropertyRange::Concept(r) => {
                let fits = |sj: usize| matches!(&spans[sj].element, Element::Instance { id } if self.is_a(id, r));
                let later = |sj: &usize| !used[*sj] && fits(*sj);
                // the rest of the clause, then anything waiting, then the rest
                // of the sentence
                if let Some(sj) = (si + 1..spans.len()).filter(later).find(|&sj| spans[sj].clause == span.clause) {
                    return Some(Slot::Span(sj));
                }
                if let Some(&sj) = st.pending.iter().rev().find(|&&sj| fits(sj)) {
                    return Some(Slot::Span(sj));
                }
                if let Some(sj) = (si + 1..spans.len()).find(later) {
                    return Some(Slot::Span(sj));
                }
                // a noun further on in the clause, or mentions that imply one,
                // before anything else claims them
                let model = self.kb.model();
                for sj in si + 1..spans.len() {
                    if used[sj] || spans[sj].clause != span.clause {
                        break;
                    }
                    match &spans[sj].element {
                        Element::Concept { name } if model.is_subtype(name, r) => return Some(Slot::Concept(sj)),
                        Element::Instance { id } => {
                            if let Some(c) = self.owner(id).filter(|c| model.is_subtype(c, r)) {
                                return Some(Slot::Implied { span: sj, concept: c });
                            }
                        }
                        _ => break,
                    }
                }
                let r = r.clone();
                if self.is_open(&r)
                    && self.word_free(st, span.end(), span.clause)
                    && Self::looks_like_name(st.words[span.end()].1)
                {
                    return Some(Slot::Named {
                        word: span.end(),
                        concept: r,
                    });
                }
                None
            }
        }
    }

    /// Property alternatives for the span's surface, preferring one whose
    /// domain covers the current subject.
    fn choose_property(&self, st: &SentenceState, span: &MatchSpan) -> Option<PropertyDef> {
        let words: Vec<String> = st.words[span.start..span.end()].iter().map(|(_, w)| w.folded.clone()).collect();
        let kb = self.kb;
        let ids: Vec<PropertyId> = candidates(kb, &words)
            .into_iter()
            .filter_map(|e| match e.element {
                Element::Property { id } => Some(id),
                _ => None,
            })
            .collect();
        let defs: Vec<&PropertyDef> = ids.iter().filter_map(|id| kb.model().property(id)).collect();
        if let Some(subject) = self.subject_id(st) {
            let types = self.types_of(&subject);
            if let Some(p) = defs
                .iter()
                .find(|p| types.iter().any(|t| kb.model().is_subtype(t, &p.id.domain)))
            {
                return Some((*p).clone());
            }
        }
        defs.first().map(|p| (*p).clone())
    }

    fn property(&mut self, st: &mut SentenceState, spans: &[MatchSpan], si: usize, used: &mut [bool], first_span: usize) {
        let span = &spans[si];
        let Some(prop) = self.choose_property(st, span) else { return };
        let Some(slot) = self.find_slot(st, spans, si, used, &prop) else {
            // "hatchback car, body type": the property names a clause a
            // mention already made; otherwise there is nothing to fill the
            // value with and the property is dropped
            let named = st.attached.iter().position(|&(d, c)| {
                matches!(&self.drafts[d].clauses[c], Clause::Property { name, .. } if *name == prop.id.name)
            });
            if let Some(k) = named {
                st.attached.remove(k);
                self.contributed[first_span + si] = true;
            }
            return;
        };
        let domain = prop.id.domain.clone();

        // subject first so that ids are minted in reading order
        let subject = match st.subject {
            Some(d) => d,
            None => {
                let d = self.new_subject(st, spans, span, &domain, first_span);
                st.subject = Some(d);
                self.attach_pending(st, spans, first_span);
                d
            }
        };
        let id = self.drafts[subject].id.clone();
        let target = if self.is_a(&id, &domain) {
            subject
        } else {
            let sep = self.draft_for(Form::New, &domain, &id);
            self.drafts[subject].push(Clause::is_a(&domain));
            self.add_type(&id, &domain);
            sep
        };

        let mut object = None;

        let value = match slot {
            Slot::Word(pos) => {
                self.consumed_words.insert((st.index, pos));
                ClauseValue::literal(&st.words[pos].1.text)
            }
            Slot::Span(sj) => {
                used[sj] = true;
                st.pending.retain(|&p| p != sj);
                self.contributed[first_span + sj] = true;
                let Element::Instance { id } = &spans[sj].element else { unreachable!("slot spans are instances") };
                let stored = self.kb.instance(id).map(|i| i.id.clone()).unwrap_or_else(|| id.clone());
                ClauseValue::instance(&self.primary_concept(id), &stored)
            }
            Slot::Named { word, concept } => {
                let id = self.named_fresh(st, word, &concept);
                ClauseValue::instance(&concept, &id)
            }
            Slot::Concept(sj) => {
                used[sj] = true;
                self.contributed[first_span + sj] = true;
                let Element::Concept { name } = &spans[sj].element else { unreachable!("concept slot") };
                let id = self.mint(name, &spans[sj].text);
                object = Some(self.draft_for(Form::New, name, &id));
                ClauseValue::instance(name, &id)
            }
            Slot::Implied { span: sj, concept } => {
                let id = self.mint(&concept, &spans[sj].text);
                object = Some(self.draft_for(Form::New, &concept, &id));
                ClauseValue::instance(&concept, &id)
            }
        };
        self.drafts[target].push(Clause::Property {
            name: prop.id.name.clone(),
            style: prop.style,
            value,
        });
        self.contributed[first_span + si] = true;
        // a freshly introduced object is what the rest of the clause describes
        if let Some(o) = object {
            st.subject = Some(o);
        }
        if st.subject == Some(target) || object.is_some() {
            self.attach_pending(st, spans, first_span);
        }
    }

    /// A fresh instance named by the word at `pos`, with that word recorded
    /// as its description.
    fn named_fresh(&mut self, st: &mut SentenceState, pos: usize, concept: &str) -> String {
        let text = st.words[pos].1.text.clone();
        self.consumed_words.insert((st.index, pos));
        let id = self.mint(concept, &text);
        st.descriptions.push(Draft {
            form: Form::Facts,
            concept: concept.to_string(),
            id: id.clone(),
            clauses: vec![Clause::has("description", ClauseValue::literal(&text))],
        });
        id
    }

    /// Subject for a property when the sentence has none yet: a waiting
    /// instance of the domain, a name just before the property, or a fresh
    /// instance of the domain.
    fn new_subject(&mut self, st: &mut SentenceState, spans: &[MatchSpan], span: &MatchSpan, domain: &str, first_span: usize) -> usize {
        let waiting = st.pending.iter().rev().copied().find(|&sj| {
            matches!(&spans[sj].element, Element::Instance { id } if self.is_a(id, domain))
        });
        if let Some(sj) = waiting {
            st.pending.retain(|&p| p != sj);
            self.contributed[first_span + sj] = true;
            let Element::Instance { id } = &spans[sj].element else { unreachable!("pending spans are instances") };
            let concept = self.primary_concept(id);
            let stored = self.kb.instance(id).map(|i| i.id.clone()).unwrap_or_else(|| id.clone());
            return self.draft_for(Form::Facts, &concept, &stored);
        }
        if let Some(b) = span.start.checked_sub(1) {
            if self.is_open(domain) && self.word_free(st, b, span.clause) && Self::looks_like_name(st.words[b].1) {
                let id = self.named_fresh(st, b, domain);
                return self.draft_for(Form::Facts, domain, &id);
            }
        }
        // "yellow van heading north": the van implies a vehicle
        let implied = st.pending.iter().find_map(|&sj| match &spans[sj].element {
            Element::Instance { id } => self.owner(id).map(|c| (sj, c)),
            _ => None,
        });
        if let Some((sj, concept)) = implied {
            let id = self.mint(&concept, &spans[sj].text);
            return self.draft_for(Form::New, &concept, &id);
        }
        let id = self.mint(domain, &span.text);
        self.draft_for(Form::New, domain, &id)
    }
}
