use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ce::{assert_statements, CeStatement};
use crate::kernel::{KnowledgeBase, Provenance};

use super::{
    assignment_statement, build_task, match_assets, Availability, Catalogue, Mode, Task, TaskingConfig, TaskingError,
};

/// Where a task stands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: Task,
    pub offered: Option<String>,
    pub assigned: Option<String>,
    pub rejected: BTreeSet<String>,
}

/// What the tasking agent decided about a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    /// The asset has been tasked.
    Assigned { task: Task, asset: String },
    /// A human must authorise this asset for the task.
    Offer { task: Task, asset: String },
    /// No suitable asset is available.
    Unmatched { task: Task },
    /// The trigger was already handled.
    Known { task: Task },
}

impl Decision {
    pub fn task(&self) -> &Task {
        match self {
            Decision::Assigned { task, .. }
            | Decision::Offer { task, .. }
            | Decision::Unmatched { task }
            | Decision::Known { task } => task,
        }
    }

    /// The CE that goes with the decision: the task, plus the assignment
    /// when one was made or proposed.
    pub fn statements(&self) -> Vec<CeStatement> {
        let task = self.task();
        let mut out = vec![task.statement()];
        if let Decision::Assigned { asset, .. } | Decision::Offer { asset, .. } = self {
            out.push(assignment_statement(&task.id, asset));
        }
        out
    }
}

/// The tasking agent: issues tasks for triggers and hands out assets.
#[derive(Debug, Clone)]
pub struct Sam {
    kb: KnowledgeBase,
    catalogue: Catalogue,
    config: TaskingConfig,
    tasks: BTreeMap<String, TaskRecord>,
}

impl Sam {
    /// `catalogue` is CE read on top of the tasking model.
    pub fn new(catalogue: &str, config: TaskingConfig) -> Result<Sam, TaskingError> {
        let kb = Catalogue::load_kb(catalogue)?;
        let catalogue = Catalogue::from_kb(&kb)?;
        Ok(Sam {
            kb,
            catalogue,
            config,
            tasks: BTreeMap::new(),
        })
    }

    pub fn bundled() -> Sam {
        Sam::new(crate::bundled::CATALOGUE, TaskingConfig::default()).expect("bundled catalogue loads")
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn catalogue(&self) -> &Catalogue {
        &self.catalogue
    }

    pub fn config(&self) -> &TaskingConfig {
        &self.config
    }

    pub fn task(&self, id: &str) -> Option<&TaskRecord> {
        self.tasks.get(id)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskRecord> {
        self.tasks.values()
    }

    /// Whether the world instance is something this agent acts on.
    pub fn is_trigger(&self, world: &KnowledgeBase, id: &str) -> bool {
        self.config.triggers.iter().any(|t| world.is_a(id, &t.concept))
    }

    /// Builds the task for a trigger and, depending on the task's priority,
    /// assigns the best asset or offers it for authorisation.
    pub fn on_trigger(&mut self, world: &KnowledgeBase, trigger: &str, provenance: &Provenance) -> Result<Decision, TaskingError> {
        let task = build_task(world, trigger, &self.config)?;
        if let Some(rec) = self.tasks.get(&task.id) {
            return Ok(Decision::Known { task: rec.task.clone() });
        }
        assert_statements(&mut self.kb, &[task.statement()], provenance)?;
        self.tasks.insert(
            task.id.clone(),
            TaskRecord {
                task: task.clone(),
                offered: None,
                assigned: None,
                rejected: BTreeSet::new(),
            },
        );
        match self.config.mode(task.priority) {
            Mode::Auto => match self.best(&task.id) {
                Some(asset) => self.assign(&task.id, &asset, provenance),
                None => Ok(Decision::Unmatched { task }),
            },
            Mode::Authorize => Ok(self.offer_next(&task.id)),
        }
    }

    fn best(&self, task: &str) -> Option<String> {
        let rec = &self.tasks[task];
        match_assets(&rec.task, &self.catalogue)
            .into_iter()
            .find(|a| !rec.rejected.contains(&a.id))
            .map(|a| a.id.clone())
    }

    fn offer_next(&mut self, task: &str) -> Decision {
        let next = self.best(task);
        let rec = self.tasks.get_mut(task).expect("task exists");
        rec.offered = next.clone();
        match next {
            Some(asset) => Decision::Offer {
                task: rec.task.clone(),
                asset,
            },
            None => Decision::Unmatched { task: rec.task.clone() },
        }
    }

    fn assign(&mut self, task: &str, asset: &str, provenance: &Provenance) -> Result<Decision, TaskingError> {
        assert_statements(&mut self.kb, &[assignment_statement(task, asset)], provenance)?;
        if let Some(a) = self.catalogue.asset_mut(asset) {
            a.availability = Availability::Tasked(task.to_string());
        }
        let rec = self.tasks.get_mut(task).expect("task exists");
        rec.offered = None;
        rec.assigned = Some(asset.to_string());
        Ok(Decision::Assigned {
            task: rec.task.clone(),
            asset: asset.to_string(),
        })
    }

    /// A human authorised the asset on offer. If it has been taken in the
    /// meantime the next best asset is offered instead.
    pub fn accept(&mut self, task: &str, provenance: &Provenance) -> Result<Decision, TaskingError> {
        let rec = self.tasks.get(task).ok_or_else(|| TaskingError::UnknownTask(task.to_string()))?;
        let offered = rec.offered.clone().ok_or_else(|| TaskingError::NothingOffered(task.to_string()))?;
        let still_free = self.catalogue.asset(&offered).is_some_and(|a| a.is_available());
        if still_free {
            self.assign(task, &offered, provenance)
        } else {
            Ok(self.offer_next(task))
        }
    }

    /// A human turned the offered asset down; the next one is offered.
    pub fn reject(&mut self, task: &str) -> Result<Decision, TaskingError> {
        let rec = self.tasks.get_mut(task).ok_or_else(|| TaskingError::UnknownTask(task.to_string()))?;
        let offered = rec.offered.take().ok_or_else(|| TaskingError::NothingOffered(task.to_string()))?;
        rec.rejected.insert(offered);
        Ok(self.offer_next(task))
    }

    /// Whether turning down the asset on offer would leave another to offer.
    pub fn has_alternative(&self, task: &str) -> bool {
        let Some(rec) = self.tasks.get(task) else { return false };
        match_assets(&rec.task, &self.catalogue)
            .iter()
            .any(|a| !rec.rejected.contains(&a.id) && rec.offered.as_deref() != Some(a.id.as_str()))
    }

    /// Marks an asset as no longer available (e.g. taken by another system).
    pub fn withdraw(&mut self, asset: &str) -> bool {
        match self.catalogue.asset_mut(asset) {
            Some(a) => {
                a.availability = Availability::Offline;
                true
            }
            None => false,
        }
    }
}
