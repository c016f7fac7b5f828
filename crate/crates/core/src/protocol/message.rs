use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ce::CeStatement;
use crate::gist::GistDescriptor;
use crate::kernel::{FactId, FactPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    NlInput,
    CeConfirmRequest,
    ConfirmAccept,
    ConfirmCorrect,
    Ask,
    Tell,
    Gist,
    ExpandRequest,
    Expand,
    Why,
    Because,
    /// A refused move or request; never part of a transcript.
    Error,
}

impl MessageKind {
    pub const ALL: [MessageKind; 12] = [
        MessageKind::NlInput,
        MessageKind::CeConfirmRequest,
        MessageKind::ConfirmAccept,
        MessageKind::ConfirmCorrect,
        MessageKind::Ask,
        MessageKind::Tell,
        MessageKind::Gist,
        MessageKind::ExpandRequest,
        MessageKind::Expand,
        MessageKind::Why,
        MessageKind::Because,
        MessageKind::Error,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::NlInput => "nl_input",
            MessageKind::CeConfirmRequest => "ce_confirm_request",
            MessageKind::ConfirmAccept => "confirm_accept",
            MessageKind::ConfirmCorrect => "confirm_correct",
            MessageKind::Ask => "ask",
            MessageKind::Tell => "tell",
            MessageKind::Gist => "gist",
            MessageKind::ExpandRequest => "expand_request",
            MessageKind::Expand => "expand",
            MessageKind::Why => "why",
            MessageKind::Because => "because",
            MessageKind::Error => "error",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MessageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MessageKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown message kind '{s}'"))
    }
}

/// Message content; which variant is allowed depends on the kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Body {
    Empty,
    /// Natural language, a gist id, or the subject of a why-question.
    Text { text: String },
    Ce { ce: String },
    /// Proposed CE awaiting acceptance.
    Confirm {
        statements: Vec<CeStatement>,
        ce: String,
        gist: String,
        score: u32,
        unmatched: Vec<String>,
    },
    Query {
        pattern: FactPattern,
        /// Properties the asker is missing, for follow-up questions.
        #[serde(default)]
        missing: Vec<String>,
        /// Keep delivering future matches.
        #[serde(default)]
        standing: bool,
        #[serde(default)]
        text: String,
    },
    /// CE answering a query; `matches` is 0 for an empty answer.
    Answer { ce: String, matches: usize },
    Gist { gist: String, descriptor: GistDescriptor },
    Rationale {
        subject: String,
        rule: Option<String>,
        premises: Vec<FactId>,
        ce: String,
    },
    Error { message: String },
}

impl Body {
    pub fn text(text: impl Into<String>) -> Body {
        Body::Text { text: text.into() }
    }

    pub fn ce(ce: impl Into<String>) -> Body {
        Body::Ce { ce: ce.into() }
    }

    /// Whether this body is the right shape for `kind`.
    pub fn fits(&self, kind: MessageKind) -> bool {
        use MessageKind as K;
        matches!(
            (kind, self),
            (K::NlInput, Body::Text { .. })
                | (K::CeConfirmRequest, Body::Confirm { .. })
                | (K::ConfirmAccept, Body::Empty)
                | (K::ConfirmCorrect, Body::Text { .. } | Body::Ce { .. })
                | (K::Ask, Body::Query { .. })
                | (K::Tell, Body::Ce { .. } | Body::Answer { .. })
                | (K::Gist, Body::Gist { .. })
                | (K::ExpandRequest, Body::Text { .. })
                | (K::Expand, Body::Ce { .. })
                | (K::Why, Body::Text { .. })
                | (K::Because, Body::Rationale { .. })
                | (K::Error, Body::Error { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub conversation: String,
    pub sender: String,
    pub audience: Vec<String>,
    pub kind: MessageKind,
    pub body: Body,
    pub in_reply_to: Option<String>,
    pub timestamp: DateTime<Utc>,
}

impl Message {
    pub fn is_for(&self, who: &str) -> bool {
        self.audience.iter().any(|a| a == who)
    }
}
