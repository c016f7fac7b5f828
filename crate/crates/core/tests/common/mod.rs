//! Helpers shared by the integration tests: protocol explorers and
//! independent oracles.
#![allow(dead_code)]

pub mod ast;
pub mod gen;
pub mod oracle;

use std::collections::BTreeSet;

use chrono::{DateTime, TimeZone, Utc};

use moira_core::ce::{parse_statements, CeStatement};
use moira_core::gist::{Device, GistDescriptor};
use moira_core::hub::{Hub, Post};
use moira_core::kernel::{FactId, FactPattern};
use moira_core::protocol::{Body, Conversation, Flow, Message, MessageKind, Phase};

pub const REPORT: &str = "Suspicious vehicle heading south: black saloon with license plate DEF456";
pub const SUSPECT: &str = "there is a person named p1 that is known as 'John Smith' and is a suspect.
the person p1 has DEF456 as linked vehicle registration.";

pub fn at(minute: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 5, 1, 9, minute, 0).unwrap()
}

/// A body of the right shape for `kind`.
pub fn sample_body(kind: MessageKind) -> Body {
    match kind {
        MessageKind::NlInput | MessageKind::ExpandRequest | MessageKind::Why => Body::text("v1"),
        MessageKind::ConfirmCorrect => Body::text("a red car"),
        MessageKind::CeConfirmRequest => Body::Confirm {
            statements: parse_statements("there is a vehicle named v1.").unwrap(),
            ce: "there is a vehicle named v1.".into(),
            gist: String::new(),
            score: 1,
            unmatched: Vec::new(),
        },
        MessageKind::ConfirmAccept => Body::Empty,
        MessageKind::Ask => Body::Query {
            pattern: FactPattern::any(),
            missing: Vec::new(),
            standing: false,
            text: String::new(),
        },
        MessageKind::Tell | MessageKind::Expand => Body::ce("there is a vehicle named v1."),
        MessageKind::Gist => Body::Gist {
            gist: "g1".into(),
            descriptor: GistDescriptor {
                text: "a vehicle".into(),
                segments: Vec::new(),
                template: None,
                sources: vec!["v1".into()],
            },
        },
        MessageKind::Because => Body::Rationale {
            subject: "v1".into(),
            rule: None,
            premises: vec![FactId(0)],
            ce: "because ...".into(),
        },
        MessageKind::Error => Body::Error { message: "no".into() },
    }
}

#[derive(Debug, Default)]
pub struct Exploration {
    pub sequences: usize,
    pub refusals: usize,
    pub phases: BTreeSet<Phase>,
    pub violations: Vec<String>,
}

/// Tries every kind (replying to the last message, and not replying) at
/// every reachable state, `depth` moves deep. Records anything that breaks
/// the conversation's invariants.
pub fn explore_conversation(flow: &Flow, depth: usize) -> Exploration {
    fn go(conv: &Conversation, flow: &Flow, depth: usize, path: &mut Vec<MessageKind>, ex: &mut Exploration) {
        ex.phases.insert(conv.phase);
        if !conv.is_consistent() {
            ex.violations.push(format!("inconsistent after {path:?}"));
        }
        if depth == 0 {
            ex.sequences += 1;
            return;
        }
        let last = conv.transcript.last().map(|m| m.id.clone());
        for kind in MessageKind::ALL {
            for reply in [last.clone(), None] {
                let msg = Message {
                    id: format!("m{}", conv.transcript.len() + 1),
                    conversation: conv.id.clone(),
                    sender: "a".into(),
                    audience: vec!["b".into()],
                    kind,
                    body: sample_body(kind),
                    in_reply_to: reply.clone(),
                    timestamp: at(0),
                };
                let mut next = conv.clone();
                match next.apply(msg, flow) {
                    Ok(()) => {
                        path.push(kind);
                        if kind == MessageKind::Error {
                            ex.violations.push(format!("error accepted after {path:?}"));
                        }
                        if conv.phase == Phase::Idle && matches!(kind, MessageKind::Why | MessageKind::Because) {
                            ex.violations.push(format!("{kind} opened a conversation"));
                        }
                        go(&next, flow, depth - 1, path, ex);
                        path.pop();
                    }
                    Err(_) => {
                        ex.refusals += 1;
                        if &next != conv {
                            ex.violations.push(format!("refused {kind} after {path:?} changed the conversation"));
                        }
                    }
                }
                if reply.is_none() {
                    break;
                }
            }
        }
    }
    let mut ex = Exploration::default();
    go(&Conversation::new("c"), flow, depth, &mut Vec::new(), &mut ex);
    ex
}

/// Moves a person can make in the hub; bodies are chosen to be valid where
/// that matters.
pub fn human_moves() -> Vec<(MessageKind, Body)> {
    vec![
        (MessageKind::NlInput, Body::text(REPORT)),
        (MessageKind::ConfirmCorrect, Body::text("black truck DEF456")),
        (MessageKind::ConfirmCorrect, Body::ce("there is a vehicle named v90 that has ABC123 as registration.")),
        (MessageKind::ConfirmAccept, Body::Empty),
        (
            MessageKind::Ask,
            Body::Query {
                pattern: FactPattern::any().of_type("vehicle"),
                missing: Vec::new(),
                standing: false,
                text: String::new(),
            },
        ),
        (MessageKind::Why, Body::text("v47")),
        (MessageKind::ExpandRequest, Body::text("g1")),
        (MessageKind::CeConfirmRequest, sample_body(MessageKind::CeConfirmRequest)),
    ]
}

pub fn scenario_hub() -> Hub {
    let mut hub = Hub::bundled();
    hub.load("there is a vehicle named v47.").unwrap();
    hub.load(SUSPECT).unwrap();
    hub
}

#[derive(Debug, Default)]
pub struct HubExploration {
    pub sequences: usize,
    pub refused: usize,
    pub accepted: usize,
    pub violations: Vec<String>,
}

/// Every sequence of `human_moves` up to `depth` in one conversation. The
/// knowledge base may only change on an accepted confirmation.
pub fn explore_hub(depth: usize) -> HubExploration {
    fn go(hub: &Hub, who: &str, conv: Option<String>, depth: usize, path: &mut Vec<MessageKind>, ex: &mut HubExploration) {
        for c in hub.conversations() {
            if !c.is_consistent() {
                ex.violations.push(format!("conversation {} inconsistent after {path:?}", c.id));
            }
        }
        if depth == 0 {
            ex.sequences += 1;
            return;
        }
        for (kind, body) in human_moves() {
            let mut next = hub.clone();
            let mut post = Post::new(kind, body);
            if let Some(c) = &conv {
                post = post.in_conversation(c);
                let last = hub.conversation(c).and_then(|c| c.transcript.last()).map(|m| m.id.clone());
                if let Some(l) = last {
                    post = post.replying_to(&l);
                }
            }
            let out = next.post(who, post, at(path.len() as u32)).unwrap();
            let refused = out.len() == 1 && out[0].kind == MessageKind::Error;
            path.push(kind);
            if refused {
                ex.refused += 1;
                if next.kb() != hub.kb() {
                    ex.violations.push(format!("refused move changed the KB: {path:?}"));
                }
                let before: Vec<_> = hub.conversations().cloned().collect();
                let after: Vec<_> = next.conversations().cloned().collect();
                if before != after {
                    ex.violations.push(format!("refused move changed conversations: {path:?}"));
                }
            } else if kind == MessageKind::ConfirmAccept {
                ex.accepted += 1;
            } else if next.kb() != hub.kb() {
                ex.violations.push(format!("{kind} changed the KB: {path:?}"));
            }
            let conv = conv.clone().or_else(|| (!refused).then(|| out[0].conversation.clone()));
            go(&next, who, conv, depth - 1, path, ex);
            path.pop();
        }
    }
    let mut hub = scenario_hub();
    let who = hub.join("PC Jones", "patrol", Device::Phone, Some("North Road")).unwrap().id;
    let mut ex = HubExploration::default();
    go(&hub, &who, None, depth, &mut Vec::new(), &mut ex);
    ex
}

pub fn statements(ce: &str) -> Vec<CeStatement> {
    parse_statements(ce).unwrap()
}
