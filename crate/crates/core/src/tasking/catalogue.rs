use std::cmp::Reverse;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bundled::{model_provenance, SAM_MODEL};
use crate::ce::load_document;
use crate::kernel::{fold, KnowledgeBase, Value};

use super::{Task, TaskingError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "task", rename_all = "snake_case")]
pub enum Availability {
    Available,
    Tasked(String),
    Offline,
}

impl Availability {
    fn parse(text: &str) -> Availability {
        match fold(text).as_str() {
            "available" => Availability::Available,
            "offline" | "unavailable" => Availability::Offline,
            other => Availability::Tasked(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Asset {
    pub id: String,
    pub asset_type: String,
    pub capabilities: BTreeSet<String>,
    pub detects: BTreeSet<String>,
    pub areas: BTreeSet<String>,
    pub quality: u32,
    pub retasking_cost: u32,
    pub availability: Availability,
}

impl Asset {
    pub fn is_available(&self) -> bool {
        self.availability == Availability::Available
    }
}

/// The sensing assets on offer and the adjacency between areas.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalogue {
    pub assets: Vec<Asset>,
    /// Unordered pairs of adjacent areas, stored lowercase both ways round.
    pub adjacent: BTreeSet<(String, String)>,
}

fn instances_of(kb: &KnowledgeBase, id: &str, property: &str) -> BTreeSet<String> {
    kb.values(id, property)
        .into_iter()
        .map(|v| match v {
            Value::Instance(i) | Value::Literal(i) => i.clone(),
        })
        .collect()
}

fn literal(kb: &KnowledgeBase, id: &str, property: &str) -> Option<String> {
    kb.values(id, property).into_iter().rev().find_map(|v| match v {
        Value::Literal(l) => Some(l.clone()),
        Value::Instance(_) => None,
    })
}

fn number(kb: &KnowledgeBase, id: &str, property: &str) -> Result<u32, TaskingError> {
    match literal(kb, id, property) {
        None => Ok(0),
        Some(text) => text.trim().parse().map_err(|_| TaskingError::BadAsset {
            asset: id.to_string(),
            message: format!("{property} '{text}' is not a whole number"),
        }),
    }
}

impl Catalogue {
    /// A knowledge base holding the tasking model and `text`.
    pub fn load_kb(text: &str) -> Result<KnowledgeBase, TaskingError> {
        let mut kb = crate::bundled::kb_from(SAM_MODEL)?;
        load_document(&mut kb, text, &model_provenance())?;
        Ok(kb)
    }

    /// Reads every sensing asset in the knowledge base.
    pub fn from_kb(kb: &KnowledgeBase) -> Result<Catalogue, TaskingError> {
        let mut assets = Vec::new();
        for inst in kb.instances().filter(|i| kb.is_a(&i.id, "sensing asset")) {
            let id = &inst.id;
            let asset = Asset {
                id: id.clone(),
                asset_type: literal(kb, id, "asset type").unwrap_or_else(|| id.clone()),
                capabilities: instances_of(kb, id, "provides"),
                detects: instances_of(kb, id, "can detect"),
                areas: instances_of(kb, id, "operates in"),
                quality: number(kb, id, "quality")?,
                retasking_cost: number(kb, id, "retasking cost")?,
                availability: literal(kb, id, "availability")
                    .map(|a| Availability::parse(&a))
                    .unwrap_or(Availability::Available),
            };
            let problem = if asset.capabilities.is_empty() {
                Some("provides no capability")
            } else if asset.areas.is_empty() {
                Some("operates in no area")
            } else {
                None
            };
            if let Some(message) = problem {
                return Err(TaskingError::BadAsset {
                    asset: id.clone(),
                    message: message.to_string(),
                });
            }
            assets.push(asset);
        }
        let mut adjacent = BTreeSet::new();
        for f in kb.query(&crate::kernel::FactPattern::any().property("is adjacent to")) {
            if let crate::kernel::Claim::Property { value, .. } = &f.claim {
                let (a, b) = (f.subject.to_lowercase(), value.to_string().to_lowercase());
                adjacent.insert((a.clone(), b.clone()));
                adjacent.insert((b, a));
            }
        }
        Ok(Catalogue { assets, adjacent })
    }

    pub fn asset(&self, id: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.id.eq_ignore_ascii_case(id))
    }

    pub fn asset_mut(&mut self, id: &str) -> Option<&mut Asset> {
        self.assets.iter_mut().find(|a| a.id.eq_ignore_ascii_case(id))
    }
}

/// An asset covers an area it operates in or one next to it.
pub fn covers_area(catalogue: &Catalogue, asset: &Asset, area: &str) -> bool {
    let area = area.to_lowercase();
    asset.areas.iter().any(|a| {
        let a = a.to_lowercase();
        a == area || catalogue.adjacent.contains(&(a, area.clone()))
    })
}

fn contains_folded(set: &BTreeSet<String>, item: &str) -> bool {
    set.iter().any(|s| s.eq_ignore_ascii_case(item))
}

/// Available assets that can do the task, best first: higher quality, then
/// cheaper to retask, then by id.
pub fn match_assets<'c>(task: &Task, catalogue: &'c Catalogue) -> Vec<&'c Asset> {
    let mut found: Vec<&Asset> = catalogue
        .assets
        .iter()
        .filter(|a| {
            contains_folded(&a.capabilities, &task.capability)
                && contains_folded(&a.detects, &task.detectable)
                && covers_area(catalogue, a, &task.area)
                && a.is_available()
        })
        .collect();
    found.sort_by_key(|a| (Reverse(a.quality), a.retasking_cost, a.id.clone()));
    found
}
