//! Data files shipped with the crate.

use chrono::{DateTime, Utc};

use crate::ce::{load_document, LoadError};
use crate::kernel::{KnowledgeBase, Provenance};

pub const MODEL: &str = include_str!("../data/model.ce");

/// Provenance attached to everything loaded from a model file.
pub fn model_provenance() -> Provenance {
    Provenance::told("model", DateTime::<Utc>::UNIX_EPOCH)
}

/// A knowledge base holding `text` as its model.
pub fn kb_from(text: &str) -> Result<KnowledgeBase, LoadError> {
    let mut kb = KnowledgeBase::new();
    load_document(&mut kb, text, &model_provenance())?;
    Ok(kb)
}

/// Moira's bundled world model.
pub fn moira_kb() -> KnowledgeBase {
    kb_from(MODEL).expect("bundled model loads")
}

pub const RULES: &str = include_str!("../data/rules.ce");

/// The bundled fusion rules.
pub fn moira_rules() -> Vec<crate::fusion::Rule> {
    crate::fusion::parse_rules(RULES).expect("bundled rules parse")
}

pub const SAM_MODEL: &str = include_str!("../data/sam_model.ce");
pub const CATALOGUE: &str = include_str!("../data/catalogue.ce");
pub const GISTS: &str = include_str!("../data/gists.txt");

/// The bundled gist templates.
pub fn gist_templates() -> Vec<crate::gist::GistTemplate> {
    crate::gist::parse_templates(GISTS).expect("bundled gist templates parse")
}
pub const INTERACTIONS: &str = include_str!("../data/interactions.txt");

/// Fifty synthetic scene descriptions, one submission per line.
pub const CORPUS: &str = include_str!("../data/corpus.txt");
