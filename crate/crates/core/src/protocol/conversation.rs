use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ce::CeStatement;

use super::{Body, Message, MessageKind, ProtocolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    Confirm,
    AskTell,
    GistExpand,
    Why,
}

impl Interaction {
    pub const ALL: [Interaction; 4] = [Interaction::Confirm, Interaction::AskTell, Interaction::GistExpand, Interaction::Why];
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interaction::Confirm => "confirm",
            Interaction::AskTell => "ask/tell",
            Interaction::GistExpand => "gist/expand",
            Interaction::Why => "why",
        })
    }
}

impl FromStr for Interaction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Interaction::ALL
            .into_iter()
            .find(|i| i.to_string() == s.trim())
            .ok_or_else(|| format!("unknown interaction '{}'", s.trim()))
    }
}

/// Where a conversation stands. Every phase but `Idle` belongs to exactly
/// one interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    AwaitingConfirmRequest,
    AwaitingDecision,
    Confirmed,
    AwaitingTell,
    Told,
    GistShown,
    AwaitingExpand,
    Expanded,
    AwaitingBecause,
    Explained,
}

impl Phase {
    pub const ALL: [Phase; 11] = [
        Phase::Idle,
        Phase::AwaitingConfirmRequest,
        Phase::AwaitingDecision,
        Phase::Confirmed,
        Phase::AwaitingTell,
        Phase::Told,
        Phase::GistShown,
        Phase::AwaitingExpand,
        Phase::Expanded,
        Phase::AwaitingBecause,
        Phase::Explained,
    ];

    pub fn interaction(self) -> Option<Interaction> {
        use Phase::*;
        match self {
            Idle => None,
            AwaitingConfirmRequest | AwaitingDecision | Confirmed => Some(Interaction::Confirm),
            AwaitingTell | Told => Some(Interaction::AskTell),
            GistShown | AwaitingExpand | Expanded => Some(Interaction::GistExpand),
            AwaitingBecause | Explained => Some(Interaction::Why),
        }
    }

    /// Whether the current interaction has reached a point where another
    /// one may begin.
    pub fn is_settled(self) -> bool {
        use Phase::*;
        matches!(self, Confirmed | Told | GistShown | Expanded | Explained)
    }
}

/// The interaction that a message kind opens, and the phase it leads to.
fn opens(kind: MessageKind) -> Option<(Interaction, Phase)> {
    use MessageKind as K;
    match kind {
        K::NlInput => Some((Interaction::Confirm, Phase::AwaitingConfirmRequest)),
        // An agent may propose CE for confirmation without a preceding report.
        K::CeConfirmRequest => Some((Interaction::Confirm, Phase::AwaitingDecision)),
        K::Ask => Some((Interaction::AskTell, Phase::AwaitingTell)),
        K::Tell => Some((Interaction::AskTell, Phase::Told)),
        K::Gist => Some((Interaction::GistExpand, Phase::GistShown)),
        K::Why => Some((Interaction::Why, Phase::AwaitingBecause)),
        _ => None,
    }
}

/// Moves inside the current interaction.
fn continues(phase: Phase, kind: MessageKind) -> Option<Phase> {
    use MessageKind as K;
    use Phase::*;
    match (phase, kind) {
        (AwaitingConfirmRequest, K::CeConfirmRequest) => Some(AwaitingDecision),
        (AwaitingDecision, K::ConfirmAccept) => Some(Confirmed),
        (AwaitingDecision, K::ConfirmCorrect) => Some(AwaitingConfirmRequest),
        (AwaitingTell, K::Tell) => Some(Told),
        (Told, K::Ask) => Some(AwaitingTell),
        (Told, K::Tell) => Some(Told),
        (GistShown, K::Gist) => Some(GistShown),
        (GistShown, K::ExpandRequest) => Some(AwaitingExpand),
        (AwaitingExpand, K::Expand) => Some(Expanded),
        (AwaitingBecause, K::Because) => Some(Explained),
        _ => None,
    }
}

/// Which interactions may start a conversation and which may follow which.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub starts: BTreeSet<Interaction>,
    pub next: BTreeMap<Interaction, BTreeSet<Interaction>>,
}

impl Flow {
    /// Reads `start: a, b` and `a -> b, c` lines.
    pub fn parse(text: &str) -> Result<Flow, String> {
        let mut flow = Flow {
            starts: BTreeSet::new(),
            next: BTreeMap::new(),
        };
        let list = |s: &str| -> Result<BTreeSet<Interaction>, String> { s.split(',').map(str::parse).collect() };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with("--") {
                continue;
            }
            let at = |e: String| format!("line {}: {e}", i + 1);
            if let Some(rest) = line.strip_prefix("start:") {
                flow.starts.extend(list(rest).map_err(at)?);
            } else if let Some((from, to)) = line.split_once("->") {
                let from: Interaction = from.parse().map_err(at)?;
                flow.next.entry(from).or_default().extend(list(to).map_err(at)?);
            } else {
                return Err(at(format!("expected 'start:' or '->' in '{line}'")));
            }
        }
        Ok(flow)
    }

    pub fn bundled() -> Flow {
        Flow::parse(crate::bundled::INTERACTIONS).expect("bundled interaction flow parses")
    }

    pub fn may_follow(&self, current: Option<Interaction>, next: Interaction) -> bool {
        match current {
            None => self.starts.contains(&next),
            Some(c) => self.next.get(&c).is_some_and(|n| n.contains(&next)),
        }
    }

    /// The phase after `kind` arrives in `phase`, if the move is legal.
    pub fn step(&self, phase: Phase, kind: MessageKind) -> Option<Phase> {
        if let Some(p) = continues(phase, kind) {
            return Some(p);
        }
        let (interaction, p) = opens(kind)?;
        let may_open = phase == Phase::Idle || phase.is_settled();
        (may_open && self.may_follow(phase.interaction(), interaction)).then_some(p)
    }
}

/// What a conversation has produced so far.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    Confirmed { statements: Vec<CeStatement> },
    Answered { ce: String },
    Expanded { ce: String },
    Explained { ce: String },
}

/// CE waiting for acceptance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pending {
    pub statements: Vec<CeStatement>,
    pub score: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub participants: Vec<String>,
    pub phase: Phase,
    pub transcript: Vec<Message>,
    pub pending: Option<Pending>,
    pub outcome: Option<Outcome>,
}

impl Conversation {
    pub fn new(id: &str) -> Self {
        Conversation {
            id: id.to_string(),
            participants: Vec::new(),
            phase: Phase::Idle,
            transcript: Vec::new(),
            pending: None,
            outcome: None,
        }
    }

    pub fn interaction(&self) -> Option<Interaction> {
        self.phase.interaction()
    }

    /// Checks a move without making it.
    pub fn check(&self, msg: &Message, flow: &Flow) -> Result<Phase, ProtocolError> {
        if msg.conversation != self.id {
            return Err(ProtocolError::WrongConversation {
                expected: self.id.clone(),
                found: msg.conversation.clone(),
            });
        }
        if !msg.body.fits(msg.kind) {
            return Err(ProtocolError::BodyMismatch { kind: msg.kind });
        }
        if msg.kind == MessageKind::Error {
            return Err(ProtocolError::Illegal {
                kind: msg.kind,
                phase: self.phase,
            });
        }
        if self.phase == Phase::Idle && matches!(msg.kind, MessageKind::Why | MessageKind::Because) {
            return Err(ProtocolError::BadOpener(msg.kind));
        }
        let next = flow.step(self.phase, msg.kind).ok_or(ProtocolError::Illegal {
            kind: msg.kind,
            phase: self.phase,
        })?;
        let opening = self.phase == Phase::Idle || continues(self.phase, msg.kind).is_none();
        match &msg.in_reply_to {
            Some(r) if !self.transcript.iter().any(|m| &m.id == r) => {
                return Err(ProtocolError::UnknownReply(r.clone()));
            }
            None if !opening => return Err(ProtocolError::MissingReply(msg.kind)),
            _ => {}
        }
        if msg.kind == MessageKind::ConfirmAccept && self.pending.is_none() {
            return Err(ProtocolError::NothingPending);
        }
        Ok(next)
    }

    /// Makes a move. On error nothing changes.
    pub fn apply(&mut self, msg: Message, flow: &Flow) -> Result<(), ProtocolError> {
        let next = self.check(&msg, flow)?;
        match (&msg.kind, &msg.body) {
            (MessageKind::CeConfirmRequest, Body::Confirm { statements, score, .. }) => {
                self.pending = Some(Pending {
                    statements: statements.clone(),
                    score: *score,
                });
            }
            (MessageKind::ConfirmAccept, _) => {
                let pending = self.pending.take().expect("checked above");
                self.outcome = Some(Outcome::Confirmed {
                    statements: pending.statements,
                });
            }
            (MessageKind::ConfirmCorrect, _) => self.pending = None,
            (MessageKind::Tell, Body::Ce { ce } | Body::Answer { ce, .. }) => {
                self.outcome = Some(Outcome::Answered { ce: ce.clone() });
            }
            (MessageKind::Expand, Body::Ce { ce }) => self.outcome = Some(Outcome::Expanded { ce: ce.clone() }),
            (MessageKind::Because, Body::Rationale { ce, .. }) => {
                self.outcome = Some(Outcome::Explained { ce: ce.clone() });
            }
            _ => {}
        }
        for who in std::iter::once(&msg.sender).chain(&msg.audience) {
            if !self.participants.contains(who) {
                self.participants.push(who.clone());
            }
        }
        self.phase = next;
        self.transcript.push(msg);
        Ok(())
    }

    /// The pending CE exists exactly while a decision is awaited.
    pub fn is_consistent(&self) -> bool {
        let pending_ok = (self.phase == Phase::AwaitingDecision) == self.pending.is_some();
        let first_ok = self
            .transcript
            .first()
            .is_none_or(|m| !matches!(m.kind, MessageKind::Why | MessageKind::Because | MessageKind::Error));
        let idle_ok = (self.phase == Phase::Idle) == self.transcript.is_empty();
        pending_ok && first_ok && idle_ok
    }
}
