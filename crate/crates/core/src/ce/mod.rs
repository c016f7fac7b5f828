//! Controlled English text: lexing, parsing, canonical rendering and loading
//! into a knowledge base.

mod apply;
mod ast;
mod describe;
mod lexer;
mod parser;
pub(crate) mod render;

pub use apply::{
    assert_statement, assert_statements, load_document, load_model, resolve_property, LoadError, LoadSummary,
};
pub use ast::{CeModelDecl, CeSentence, CeStatement, Clause, ClauseValue, Located, PropertyDecl};
pub use describe::{describe_fact, describe_instance, describe_model, fact_clause, instance_ref, order_clauses};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_document, parse_model, parse_statement, parse_statements, CeParser};
pub use render::{
    article, is_bare, quote, render_body, render_clause, render_model_decl, render_statement,
    render_statements,
};

use thiserror::Error;

/// Syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct CeError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl CeError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        CeError {
            line,
            column,
            message: message.into(),
        }
    }
}
