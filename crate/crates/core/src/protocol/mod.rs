//! The conversation protocol: typed messages and the state machine that
//! decides which message may come next.
//!
//! A conversation is a run of interactions — confirm, ask/tell, gist/expand
//! and why — each a short exchange of messages. [`Flow`] holds which
//! interaction may open a conversation and which may follow which; it is
//! read from a data file so the arrangement can change without code.

mod conversation;
mod message;

use thiserror::Error;

pub use conversation::{Conversation, Flow, Interaction, Outcome, Pending, Phase};
pub use message::{Body, Message, MessageKind};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("a conversation cannot begin with {0}")]
    BadOpener(MessageKind),
    #[error("{kind} is not allowed while {phase:?}")]
    Illegal { kind: MessageKind, phase: Phase },
    #[error("{kind} carries the wrong kind of body")]
    BodyMismatch { kind: MessageKind },
    #[error("{0} must reply to an earlier message")]
    MissingReply(MessageKind),
    #[error("no message '{0}' in this conversation")]
    UnknownReply(String),
    #[error("nothing is waiting to be confirmed")]
    NothingPending,
    #[error("message for conversation '{found}' sent to '{expected}'")]
    WrongConversation { expected: String, found: String },
}
