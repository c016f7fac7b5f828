use serde::{Deserialize, Serialize};

use crate::ce::{CeStatement, Clause, ClauseValue};
use crate::kernel::{KnowledgeBase, Value};

use super::{Priority, TaskingConfig, TaskingError};

/// Area recorded when the target has no known location.
pub const UNKNOWN_AREA: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub capability: String,
    pub detectable: String,
    /// The specific instance being looked for, as (concept, id).
    pub sought: Option<(String, String)>,
    pub area: String,
    pub priority: Priority,
    /// The trigger that caused this task.
    pub trigger: String,
    /// Set when something (so far only the area) needs a human to fill in.
    pub incomplete: bool,
}

impl Task {
    /// The task request as one `there is a task` statement.
    pub fn statement(&self) -> CeStatement {
        let mut clauses = vec![
            Clause::verb("requires", ClauseValue::instance("intelligence capability", &self.capability)),
            Clause::verb("is looking for", ClauseValue::instance("detectable thing", &self.detectable)),
        ];
        if let Some((concept, id)) = &self.sought {
            clauses.push(Clause::verb("is seeking instance", ClauseValue::instance(concept, id)));
        }
        clauses.push(Clause::verb("operates in", ClauseValue::instance("spatial area", &self.area)));
        clauses.push(Clause::verb(
            "is ranked with",
            ClauseValue::instance("task priority", &self.priority.to_string()),
        ));
        CeStatement::new_instance("task", &self.id, clauses)
    }
}

/// `the task T is assigned to the sensing asset A.`
pub fn assignment_statement(task: &str, asset: &str) -> CeStatement {
    CeStatement::instance_facts(
        "task",
        task,
        vec![Clause::verb("is assigned to", ClauseValue::instance("sensing asset", asset))],
    )
}

/// Builds the task a trigger calls for. The task id is the trigger's prefix
/// plus the trigger id, so the same trigger always yields the same task.
pub fn build_task(world: &KnowledgeBase, trigger: &str, config: &TaskingConfig) -> Result<Task, TaskingError> {
    let inst = world
        .instance(trigger)
        .ok_or_else(|| TaskingError::UnknownInstance(trigger.to_string()))?;
    let spec = config
        .triggers
        .iter()
        .find(|t| world.is_a(&inst.id, &t.concept))
        .ok_or_else(|| TaskingError::NotATrigger(inst.id.clone()))?;
    let target = world
        .values(&inst.id, &spec.target)
        .into_iter()
        .find_map(|v| match v {
            Value::Instance(id) => Some(id.clone()),
            Value::Literal(_) => None,
        })
        .ok_or_else(|| TaskingError::NoTarget {
            trigger: inst.id.clone(),
            property: spec.target.clone(),
        })?;
    let (concept, detectable) = config
        .detectable
        .iter()
        .find(|(concept, _)| world.is_a(&target, concept))
        .ok_or_else(|| TaskingError::NotDetectable(target.clone()))?;
    // The latest report of where the target is wins.
    let area = world
        .values(&target, &config.location)
        .into_iter()
        .rev()
        .find_map(|v| match v {
            Value::Instance(a) => Some(a.clone()),
            Value::Literal(_) => None,
        });
    let incomplete = area.is_none();
    Ok(Task {
        id: format!("{}{}", spec.prefix, inst.id),
        capability: spec.capability.clone(),
        detectable: detectable.clone(),
        sought: Some((concept.clone(), target)),
        area: area.unwrap_or_else(|| UNKNOWN_AREA.to_string()),
        priority: spec.priority,
        trigger: inst.id.clone(),
        incomplete,
    })
}
