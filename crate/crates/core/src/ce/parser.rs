//! Recursive-descent parser for the CE constructions used by the engine.
//!
//! The grammar covers `conceptualise`, synonym declarations (`is expressed
//! by`), `there is a ... named ...`, `the <concept> <id> ...` and
//! `because ...`. Property names are not checked against a model. A parser
//! built with a concept vocabulary splits `the <concept> <id>` subjects by
//! longest concept match; without one the split falls back to the first
//! `has` / `is` keyword.

use std::collections::BTreeSet;

use crate::kernel::{fold, CeModel, PropertyId, PropertyRange, PropertyStyle, SynonymTarget};

use super::ast::{CeModelDecl, CeSentence, CeStatement, Clause, ClauseValue, Located, PropertyDecl};
use super::lexer::{tokenize, Token, TokenKind};
use super::CeError;

/// Tokens of one sentence, without its period.
#[derive(Debug, Clone)]
pub(crate) struct RawSentence {
    pub line: usize,
    pub tokens: Vec<Token>,
    /// Position of the terminating period.
    pub end: (usize, usize),
}

pub(crate) fn split_sentences(text: &str) -> Result<Vec<RawSentence>, CeError> {
    let tokens = tokenize(text)?;
    let mut out = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for t in tokens {
        if t.kind == TokenKind::Period {
            if !current.is_empty() {
                out.push(RawSentence {
                    line: current[0].line,
                    tokens: std::mem::take(&mut current),
                    end: (t.line, t.column),
                });
            }
        } else {
            current.push(t);
        }
    }
    if let Some(last) = current.last() {
        return Err(CeError::new(last.line, last.column, "sentence is missing its final period"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct CeParser {
    /// Concept names as folded word sequences, longest first.
    concepts: Vec<Vec<String>>,
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    /// Location used for errors at the end of the sentence.
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn peek(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + k)
    }

    fn is(&self, k: usize, kw: &str) -> bool {
        self.peek(k).is_some_and(|t| t.is(kw))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> CeError {
        match self.peek(0) {
            Some(t) => CeError::new(t.line, t.column, format!("{} (found {})", msg.into(), t.describe())),
            None => CeError::new(self.end.0, self.end.1, format!("{} (found end of sentence)", msg.into())),
        }
    }

    fn expect(&mut self, kw: &str) -> Result<(), CeError> {
        if self.is(0, kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{kw}'")))
        }
    }

    fn expect_article(&mut self) -> Result<(), CeError> {
        if self.is(0, "a") || self.is(0, "an") {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err("expected 'a' or 'an'"))
        }
    }

    fn expect_tilde(&mut self) -> Result<(), CeError> {
        match self.peek(0) {
            Some(Token { kind: TokenKind::Tilde, .. }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err("expected '~'")),
        }
    }

    fn quoted(&mut self) -> Result<String, CeError> {
        match self.peek(0) {
            Some(Token { kind: TokenKind::Quoted(q), .. }) => {
                self.pos += 1;
                Ok(q.clone())
            }
            _ => Err(self.err("expected a quoted value")),
        }
    }

    /// Word or quoted token used as an instance id or literal.
    fn atom(&mut self) -> Result<String, CeError> {
        match self.peek(0).map(|t| &t.kind) {
            Some(TokenKind::Word(w)) | Some(TokenKind::Quoted(w)) => {
                self.pos += 1;
                Ok(w.clone())
            }
            _ => Err(self.err("expected a name or quoted value")),
        }
    }

    /// Plain words up to (not including) any of `stops` or the end.
    fn words_until(&mut self, stops: &[&str]) -> Result<Vec<String>, CeError> {
        let mut out = Vec::new();
        while let Some(t) = self.peek(0) {
            if stops.iter().any(|s| t.is(s)) {
                break;
            }
            match &t.kind {
                TokenKind::Word(w) => out.push(w.clone()),
                _ => break,
            }
            self.pos += 1;
        }
        Ok(out)
    }

    fn name_until(&mut self, stops: &[&str], what: &str) -> Result<String, CeError> {
        let words = self.words_until(stops)?;
        if words.is_empty() {
            return Err(self.err(format!("expected {what}")));
        }
        Ok(fold(&words.join(" ")))
    }

    /// Tokens (words or quotes) up to a stop keyword or the end.
    fn atoms_until(&mut self, stops: &[&str]) -> Vec<&'a Token> {
        let mut out = Vec::new();
        while let Some(t) = self.peek(0) {
            if stops.iter().any(|s| t.is(s)) || matches!(t.kind, TokenKind::Tilde) {
                break;
            }
            out.push(t);
            self.pos += 1;
        }
        out
    }
}

fn atom_text(t: &Token) -> Option<&str> {
    match &t.kind {
        TokenKind::Word(w) | TokenKind::Quoted(w) => Some(w),
        _ => None,
    }
}

/// `<concept words> <id>` from a token run. The last token is the id.
fn concept_and_id(toks: &[&Token], cur: &Cursor) -> Result<(String, String), CeError> {
    if toks.len() < 2 {
        return Err(cur.err("expected '<concept> <name>' after 'the'"));
    }
    let (concept, id) = toks.split_at(toks.len() - 1);
    let mut words = Vec::new();
    for t in concept {
        match t.word() {
            Some(w) => words.push(w.to_string()),
            None => {
                return Err(CeError::new(t.line, t.column, format!("unexpected {} in concept name", t.describe())))
            }
        }
    }
    let id = atom_text(id[0]).ok_or_else(|| cur.err("expected a name"))?;
    Ok((fold(&words.join(" ")), id.to_string()))
}

fn looks_like_variable(w: &str) -> bool {
    w.chars().next().is_some_and(|c| c.is_uppercase())
        && w.chars().all(|c| c.is_uppercase() || c.is_ascii_digit() || c == '_')
}

impl CeParser {
    /// Model-free parser.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_concepts<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<Vec<String>> = names
            .into_iter()
            .map(|n| fold(n.as_ref()).split(' ').map(str::to_string).collect())
            .collect();
        let mut concepts: Vec<Vec<String>> = set.into_iter().collect();
        concepts.sort_by_key(|c| std::cmp::Reverse(c.len()));
        CeParser { concepts }
    }

    pub fn for_model(model: &CeModel) -> Self {
        Self::with_concepts(model.concepts().map(|c| c.name.clone()))
    }

    pub fn add_concepts<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut all: Vec<String> = self.concepts.iter().map(|c| c.join(" ")).collect();
        all.extend(names.into_iter().map(|n| n.as_ref().to_string()));
        *self = Self::with_concepts(all);
    }

    /// Splits text into sentences and parses each one.
    pub fn parse_document(&self, text: &str) -> Result<Vec<Located<CeSentence>>, CeError> {
        split_sentences(text)?
            .iter()
            .map(|raw| self.parse_raw(raw))
            .collect()
    }

    pub(crate) fn parse_raw(&self, raw: &RawSentence) -> Result<Located<CeSentence>, CeError> {
        let item = self.sentence(&raw.tokens, raw.end)?;
        Ok(Located { line: raw.line, item })
    }

    pub fn parse_statements(&self, text: &str) -> Result<Vec<CeStatement>, CeError> {
        self.parse_document(text)?
            .into_iter()
            .map(|s| match s.item {
                CeSentence::Statement(st) => Ok(st),
                CeSentence::Model(_) => Err(CeError::new(s.line, 1, "expected a statement, found a model declaration")),
            })
            .collect()
    }

    /// Parses exactly one statement.
    pub fn parse_statement(&self, text: &str) -> Result<CeStatement, CeError> {
        let mut stmts = self.parse_statements(text)?;
        match stmts.len() {
            1 => Ok(stmts.remove(0)),
            0 => Err(CeError::new(1, 1, "expected a statement, found nothing")),
            n => Err(CeError::new(1, 1, format!("expected one statement, found {n}"))),
        }
    }

    /// Parses model declarations. Clause-free `there is` sentences become
    /// static instances. Every concept referenced must be declared somewhere
    /// in the same text or already be known to the parser.
    pub fn parse_model(&self, text: &str) -> Result<Vec<CeModelDecl>, CeError> {
        let mut decls = Vec::new();
        let mut lines = Vec::new();
        for s in self.parse_document(text)? {
            let decl = match s.item {
                CeSentence::Model(d) => d,
                CeSentence::Statement(CeStatement::NewInstance { concept, id, clauses }) if clauses.is_empty() => {
                    CeModelDecl::StaticInstance { concept, id }
                }
                CeSentence::Statement(_) => {
                    return Err(CeError::new(s.line, 1, "ground statement with clauses is not a model declaration"))
                }
            };
            lines.push(s.line);
            decls.push(decl);
        }
        let mut declared: BTreeSet<String> = decls
            .iter()
            .filter_map(|d| match d {
                CeModelDecl::Conceptualise { name, .. } => Some(fold(name)),
                _ => None,
            })
            .collect();
        declared.extend(self.concepts.iter().map(|c| c.join(" ")));
        let check = |c: &str, line: usize| {
            if declared.contains(&fold(c)) {
                Ok(())
            } else {
                Err(CeError::new(line, 1, format!("concept '{c}' is never declared")))
            }
        };
        for (d, &line) in decls.iter().zip(&lines) {
            match d {
                CeModelDecl::Conceptualise { parents, properties, .. } => {
                    for p in parents {
                        check(p, line)?;
                    }
                    for p in properties {
                        if let PropertyRange::Concept(c) = &p.range {
                            check(c, line)?;
                        }
                    }
                }
                CeModelDecl::StaticInstance { concept, .. } => check(concept, line)?,
                CeModelDecl::SynonymDecl { target, .. } => match target {
                    SynonymTarget::Concept(c) => check(c, line)?,
                    SynonymTarget::Property(p) => check(&p.domain, line)?,
                    SynonymTarget::Instance(_) => {}
                },
            }
        }
        Ok(decls)
    }

    fn sentence(&self, toks: &[Token], end: (usize, usize)) -> Result<CeSentence, CeError> {
        let mut cur = Cursor { toks, pos: 0, end };
        let sentence = if cur.is(0, "conceptualise") {
            CeSentence::Model(self.conceptualise(&mut cur)?)
        } else if cur.is(0, "the")
            && ((cur.is(1, "entity") || cur.is(1, "relation")) && cur.is(2, "concept")
                || cur.is(1, "instance") && matches!(cur.peek(2).map(|t| &t.kind), Some(TokenKind::Quoted(_))))
        {
            CeSentence::Model(self.synonym(&mut cur)?)
        } else if cur.is(0, "because") {
            cur.bump();
            let mut premises = vec![self.statement(&mut cur, true)?];
            while cur.is(0, "and") {
                cur.bump();
                premises.push(self.statement(&mut cur, true)?);
            }
            CeSentence::Statement(CeStatement::Because { premises })
        } else {
            self.statement(&mut cur, false).map(CeSentence::Statement)?
        };
        if !cur.at_end() {
            return Err(cur.err("unexpected trailing text"));
        }
        Ok(sentence)
    }

    fn statement(&self, cur: &mut Cursor, in_because: bool) -> Result<CeStatement, CeError> {
        if cur.is(0, "there") {
            cur.bump();
            cur.expect("is")?;
            cur.expect_article()?;
            let concept = cur.name_until(&["named"], "a concept name")?;
            cur.expect("named")?;
            let id = cur.atom()?;
            let clauses = if cur.is(0, "that") {
                cur.bump();
                self.clauses(cur, in_because)?
            } else {
                Vec::new()
            };
            Ok(CeStatement::NewInstance { concept, id, clauses })
        } else if cur.is(0, "the") {
            cur.bump();
            let (concept, id) = self.subject(cur)?;
            let clauses = if cur.at_end() || cur.is(0, "and") {
                Vec::new()
            } else {
                self.clauses(cur, in_because)?
            };
            Ok(CeStatement::InstanceFacts { concept, id, clauses })
        } else {
            Err(cur.err("expected 'there is', 'the', 'because' or 'conceptualise'"))
        }
    }

    /// `<concept> <id>` subject of an instance-facts statement.
    fn subject(&self, cur: &mut Cursor) -> Result<(String, String), CeError> {
        let upcoming: Vec<String> = (0..)
            .map_while(|k| cur.peek(k))
            .map(|t| atom_text(t).map(fold).unwrap_or_default())
            .collect();
        for concept in &self.concepts {
            let n = concept.len();
            if upcoming.len() > n && upcoming[..n] == concept[..] && cur.peek(n).and_then(atom_text).is_some() {
                cur.pos += n;
                let id = cur.atom()?;
                return Ok((concept.join(" "), id));
            }
        }
        // fallback: the id is the first quoted token, or precedes the first
        // `has`/`is`
        let mut k = 1;
        while let Some(t) = cur.peek(k) {
            if t.is("and") {
                break;
            }
            if matches!(t.kind, TokenKind::Quoted(_)) {
                let toks: Vec<&Token> = (0..=k).filter_map(|j| cur.peek(j)).collect();
                cur.pos += k + 1;
                return concept_and_id(&toks, cur);
            }
            if (t.is("has") || t.is("is")) && k >= 2 {
                let toks: Vec<&Token> = (0..k).filter_map(|j| cur.peek(j)).collect();
                cur.pos += k;
                return concept_and_id(&toks, cur);
            }
            k += 1;
        }
        let toks: Vec<&Token> = (0..k).filter_map(|j| cur.peek(j)).collect();
        let split = concept_and_id(&toks, cur)?;
        cur.pos += k;
        Ok(split)
    }

    fn clauses(&self, cur: &mut Cursor, in_because: bool) -> Result<Vec<Clause>, CeError> {
        let mut out = vec![self.clause(cur)?];
        while cur.is(0, "and") {
            let starts_statement = cur.is(1, "the") || (cur.is(1, "there") && cur.is(2, "is"));
            if starts_statement {
                if in_because {
                    break;
                }
                cur.bump();
                return Err(cur.err("a new statement cannot follow 'and' outside a 'because' sentence"));
            }
            cur.bump();
            out.push(self.clause(cur)?);
        }
        Ok(out)
    }

    fn instance_value(&self, cur: &mut Cursor, stops: &[&str]) -> Result<ClauseValue, CeError> {
        cur.expect("the")?;
        let toks = cur.atoms_until(stops);
        let (concept, id) = concept_and_id(&toks, cur)?;
        Ok(ClauseValue::Instance { concept, id })
    }

    fn clause(&self, cur: &mut Cursor) -> Result<Clause, CeError> {
        if cur.is(0, "has") {
            cur.bump();
            let value = if cur.is(0, "the") {
                self.instance_value(cur, &["as"])?
            } else {
                ClauseValue::Literal { text: cur.atom()? }
            };
            cur.expect("as")?;
            let name = cur.name_until(&["and"], "a property name")?;
            return Ok(Clause::Property {
                name,
                style: PropertyStyle::Has,
                value,
            });
        }
        if cur.is(0, "is") && (cur.is(1, "a") || cur.is(1, "an")) {
            cur.pos += 2;
            let concept = cur.name_until(&["and"], "a concept name")?;
            return Ok(Clause::IsA { concept });
        }
        if cur.is(0, "is") && cur.is(1, "known") && cur.is(2, "as") {
            cur.pos += 3;
            let label = cur.atom()?;
            return Ok(Clause::KnownAs { label });
        }
        // verb phrase property
        let name = cur.name_until(&["the", "and"], "a property phrase")?;
        let value = match cur.peek(0).map(|t| &t.kind) {
            Some(TokenKind::Quoted(q)) => {
                let q = q.clone();
                cur.bump();
                ClauseValue::Literal { text: q }
            }
            _ if cur.is(0, "the") => self.instance_value(cur, &["and"])?,
            _ => return Err(cur.err(format!("expected a value after '{name}'"))),
        };
        Ok(Clause::Property {
            name,
            style: PropertyStyle::Verb,
            value,
        })
    }

    fn conceptualise(&self, cur: &mut Cursor) -> Result<CeModelDecl, CeError> {
        cur.expect("conceptualise")?;
        cur.expect_article()?;
        cur.expect_tilde()?;
        let name = cur.name_until(&[], "a concept name")?;
        cur.expect_tilde()?;
        // optional variable marker, discarded
        if !cur.is(0, "that") && cur.peek(0).and_then(Token::word).is_some() {
            cur.bump();
        }
        let mut parents = Vec::new();
        let mut properties = Vec::new();
        if cur.is(0, "that") {
            cur.bump();
            loop {
                if cur.is(0, "is") && (cur.is(1, "a") || cur.is(1, "an")) {
                    cur.pos += 2;
                    parents.push(cur.name_until(&["and"], "a parent concept")?);
                } else if cur.is(0, "has") {
                    cur.bump();
                    cur.expect("the")?;
                    let words = cur.words_until(&["as"])?;
                    cur.expect("as")?;
                    let range = Self::decl_range(&words, cur)?;
                    cur.expect_tilde()?;
                    let pname = cur.name_until(&[], "a property name")?;
                    cur.expect_tilde()?;
                    properties.push(PropertyDecl {
                        name: pname,
                        range,
                        style: PropertyStyle::Has,
                    });
                } else if matches!(cur.peek(0).map(|t| &t.kind), Some(TokenKind::Tilde)) {
                    cur.bump();
                    let pname = cur.name_until(&[], "a property phrase")?;
                    cur.expect_tilde()?;
                    cur.expect("the")?;
                    let words = cur.words_until(&["and"])?;
                    let range = Self::decl_range(&words, cur)?;
                    properties.push(PropertyDecl {
                        name: pname,
                        range,
                        style: PropertyStyle::Verb,
                    });
                } else {
                    return Err(cur.err("expected 'is a', 'has the' or '~ <property> ~'"));
                }
                if cur.is(0, "and") {
                    cur.bump();
                } else {
                    break;
                }
            }
        }
        Ok(CeModelDecl::Conceptualise {
            name,
            parents,
            properties,
        })
    }

    fn decl_range(words: &[String], cur: &Cursor) -> Result<PropertyRange, CeError> {
        let mut words = words.to_vec();
        if words.len() >= 2 && looks_like_variable(words.last().expect("len >= 2")) {
            words.pop();
        }
        if words.is_empty() {
            return Err(cur.err("expected a range concept"));
        }
        let name = fold(&words.join(" "));
        Ok(if name == "value" {
            PropertyRange::Value
        } else {
            PropertyRange::Concept(name)
        })
    }

    fn synonym(&self, cur: &mut Cursor) -> Result<CeModelDecl, CeError> {
        cur.expect("the")?;
        let kind = if cur.is(0, "instance") {
            cur.bump();
            "instance"
        } else if cur.is(0, "entity") {
            cur.pos += 2;
            "entity"
        } else {
            cur.pos += 2;
            "relation"
        };
        let key_tok = cur.peek(0);
        let key = cur.quoted()?;
        let target = match kind {
            "instance" => SynonymTarget::Instance(key),
            "entity" => SynonymTarget::Concept(fold(&key)),
            _ => {
                let id: PropertyId = key.parse().map_err(|e: crate::kernel::KernelError| {
                    let t = key_tok.expect("quoted token present");
                    CeError::new(t.line, t.column, e.to_string())
                })?;
                SynonymTarget::Property(id)
            }
        };
        let mut surfaces = Vec::new();
        loop {
            for kw in ["is", "expressed", "by", "the", "value"] {
                cur.expect(kw)?;
            }
            surfaces.push(cur.quoted()?);
            if cur.is(0, "and") {
                cur.bump();
            } else {
                break;
            }
        }
        Ok(CeModelDecl::SynonymDecl { target, surfaces })
    }
}

pub fn parse_document(text: &str) -> Result<Vec<Located<CeSentence>>, CeError> {
    CeParser::new().parse_document(text)
}

pub fn parse_statement(text: &str) -> Result<CeStatement, CeError> {
    CeParser::new().parse_statement(text)
}

pub fn parse_statements(text: &str) -> Result<Vec<CeStatement>, CeError> {
    CeParser::new().parse_statements(text)
}

pub fn parse_model(text: &str) -> Result<Vec<CeModelDecl>, CeError> {
    CeParser::new().parse_model(text)
}
