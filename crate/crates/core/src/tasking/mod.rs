//! Sensor tasking: turning triggers such as suspect sightings into task
//! requests and matching them against a catalogue of sensing assets.
//!
//! The tasking agent keeps its own knowledge base (asset model, catalogue and
//! the tasks it has issued), separate from the reporting world model.

mod catalogue;
mod sam;
mod task;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ce::LoadError;
use crate::kernel::KernelError;

pub use catalogue::{covers_area, match_assets, Asset, Availability, Catalogue};
pub use sam::{Decision, Sam, TaskRecord};
pub use task::{assignment_statement, build_task, Task, UNKNOWN_AREA};

#[derive(Debug, Error)]
pub enum TaskingError {
    #[error("'{0}' is not a known instance")]
    UnknownInstance(String),
    #[error("'{0}' is not of any trigger concept")]
    NotATrigger(String),
    #[error("trigger '{trigger}' has no {property}")]
    NoTarget { trigger: String, property: String },
    #[error("no detectable thing is configured for '{0}'")]
    NotDetectable(String),
    #[error("no task named '{0}'")]
    UnknownTask(String),
    #[error("task '{0}' has no asset on offer")]
    NothingOffered(String),
    #[error("catalogue: {0}")]
    Catalogue(#[from] LoadError),
    #[error("asset '{asset}': {message}")]
    BadAsset { asset: String, message: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    Low,
    Medium,
    High,
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Priority::Low => "Low",
            Priority::Medium => "Medium",
            Priority::High => "High",
        })
    }
}

impl FromStr for Priority {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Priority::Low),
            "medium" => Ok(Priority::Medium),
            "high" => Ok(Priority::High),
            _ => Err(format!("unknown priority '{s}'")),
        }
    }
}

/// Whether an assignment happens straight away or waits for a human.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Auto,
    Authorize,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Auto => "auto",
            Mode::Authorize => "authorize",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Mode::Auto),
            "authorize" | "authorise" => Ok(Mode::Authorize),
            _ => Err(format!("unknown mode '{s}'")),
        }
    }
}

/// Reads a mode map written as `high=auto,medium=authorize`. Priorities not
/// mentioned keep their default.
pub fn parse_modes(text: &str) -> Result<BTreeMap<Priority, Mode>, String> {
    let mut modes = TaskingConfig::default().modes;
    for item in text.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (p, m) = item
            .split_once('=')
            .ok_or_else(|| format!("expected 'priority=mode', got '{item}'"))?;
        modes.insert(p.trim().parse()?, m.trim().parse()?);
    }
    Ok(modes)
}

/// A concept whose new instances call for a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerSpec {
    pub concept: String,
    /// Property of the trigger naming the thing to look for.
    pub target: String,
    pub capability: String,
    pub priority: Priority,
    /// Prefix for task ids; the trigger id follows it.
    pub prefix: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskingConfig {
    pub triggers: Vec<TriggerSpec>,
    /// World concept → detectable thing, most specific first.
    pub detectable: Vec<(String, String)>,
    /// Property of the target holding its last known area.
    pub location: String,
    pub modes: BTreeMap<Priority, Mode>,
}

impl Default for TaskingConfig {
    fn default() -> Self {
        TaskingConfig {
            triggers: vec![TriggerSpec {
                concept: "suspect sighting".into(),
                target: "target vehicle".into(),
                capability: "localize".into(),
                priority: Priority::High,
                prefix: "TS_".into(),
            }],
            detectable: vec![("vehicle".into(), "car".into()), ("person".into(), "person".into())],
            location: "location".into(),
            modes: BTreeMap::from([
                (Priority::Low, Mode::Authorize),
                (Priority::Medium, Mode::Authorize),
                (Priority::High, Mode::Auto),
            ]),
        }
    }
}

impl TaskingConfig {
    pub fn mode(&self, priority: Priority) -> Mode {
        self.modes.get(&priority).copied().unwrap_or(Mode::Authorize)
    }

    /// Every priority assigned the same mode.
    pub fn with_mode(mut self, mode: Mode) -> Self {
        for p in [Priority::Low, Priority::Medium, Priority::High] {
            self.modes.insert(p, mode);
        }
        self
    }
}
