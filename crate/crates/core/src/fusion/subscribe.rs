use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kernel::{FactId, FactPattern, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subscription {
    pub id: u64,
    pub subscriber: String,
    pub pattern: FactPattern,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub subscription: u64,
    pub subscriber: String,
    pub fact: FactId,
}

/// Standing queries over the knowledge base. Each matching fact is
/// delivered to each subscription exactly once.
#[derive(Debug, Clone, Default)]
pub struct Subscriptions {
    next: u64,
    active: Vec<Subscription>,
    delivered: BTreeSet<(u64, FactId)>,
}

impl Subscriptions {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a subscription and returns the facts that already match.
    pub fn subscribe(&mut self, kb: &KnowledgeBase, subscriber: &str, pattern: FactPattern) -> (u64, Vec<Delivery>) {
        self.next += 1;
        let sub = Subscription {
            id: self.next,
            subscriber: subscriber.to_string(),
            pattern,
        };
        let id = sub.id;
        self.active.push(sub);
        let now = self.collect(kb, Some(id));
        (id, now)
    }

    pub fn unsubscribe(&mut self, id: u64) -> bool {
        let before = self.active.len();
        self.active.retain(|s| s.id != id);
        self.delivered.retain(|(s, _)| *s != id);
        self.active.len() != before
    }

    pub fn active(&self) -> &[Subscription] {
        &self.active
    }

    /// Everything not yet delivered, in subscription order then fact order.
    pub fn poll(&mut self, kb: &KnowledgeBase) -> Vec<Delivery> {
        self.collect(kb, None)
    }

    fn collect(&mut self, kb: &KnowledgeBase, only: Option<u64>) -> Vec<Delivery> {
        let mut out = Vec::new();
        for sub in self.active.iter().filter(|s| only.is_none_or(|id| s.id == id)) {
            for fact in kb.query(&sub.pattern) {
                if self.delivered.insert((sub.id, fact.id)) {
                    out.push(Delivery {
                        subscription: sub.id,
                        subscriber: sub.subscriber.clone(),
                        fact: fact.id,
                    });
                }
            }
        }
        out
    }
}
