//! Moira's side of the conversations: receives participants' messages,
//! replies to them, and runs fusion, tasking and notifications after every
//! change to the knowledge base.
//!
//! Everything is synchronous and single-threaded; a server wraps the hub in
//! a lock, which also serialises knowledge-base writes.

mod moira;

pub use moira::AGENT_ONLY;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ce::{load_document, LoadError, LoadSummary};
use crate::fusion::{Rule, Subscriptions};
use crate::fusion::FusionError;
use crate::gist::{Device, GistError, GistStore, GistTemplate};
use crate::interpret::{IdPool, Interpreter};
use crate::kernel::{fold, KnowledgeBase};
use crate::protocol::{Body, Conversation, Flow, Message, MessageKind};
use crate::tasking::{Sam, TaskingConfig, TaskingError};

pub const MOIRA: &str = "moira";
pub const SAM: &str = "sam";
pub const FUSION: &str = "fusion";

#[derive(Debug, Error)]
pub enum HubError {
    #[error("no participant '{0}'")]
    UnknownParticipant(String),
    #[error("unknown role '{0}'")]
    UnknownRole(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Rules(#[from] FusionError),
    #[error(transparent)]
    Templates(#[from] GistError),
    #[error(transparent)]
    Tasking(#[from] TaskingError),
}

/// Texts a hub is built from; `None` takes the bundled one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sources {
    pub model: Option<String>,
    pub rules: Option<String>,
    pub templates: Option<String>,
    pub catalogue: Option<String>,
}

impl Sources {
    /// The world model on its own, as the interpreter sees it.
    pub fn model_kb(&self) -> Result<KnowledgeBase, HubError> {
        Ok(match &self.model {
            Some(text) => crate::bundled::kb_from(text)?,
            None => crate::bundled::moira_kb(),
        })
    }

    pub fn rules(&self) -> Result<Vec<Rule>, HubError> {
        let text = self.rules.as_deref().unwrap_or(crate::bundled::RULES);
        Ok(crate::fusion::parse_rules(text)?)
    }

    /// The gist templates, each checked against the model its trigger
    /// belongs to: tasks against the tasking model, the rest against the
    /// world.
    pub fn templates(&self, world: &KnowledgeBase, sam: &Sam) -> Result<Vec<GistTemplate>, HubError> {
        let text = self.templates.as_deref().unwrap_or(crate::bundled::GISTS);
        let templates = crate::gist::parse_templates(text)?;
        for t in &templates {
            let model = if world.model().has_concept(&t.trigger) && t.trigger != "task" {
                world.model()
            } else {
                sam.kb().model()
            };
            t.validate(model)?;
        }
        Ok(templates)
    }

    pub fn sam(&self, tasking: TaskingConfig) -> Result<Sam, HubError> {
        let text = self.catalogue.as_deref().unwrap_or(crate::bundled::CATALOGUE);
        Ok(Sam::new(text, tasking)?)
    }
}

/// What a role may see and do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSpec {
    /// Sees conversations between machine agents.
    pub observes: bool,
    /// Receives gists about assigned tasks.
    pub notified: bool,
    /// Is asked to authorise asset assignments.
    pub authorizes: bool,
    /// May add facts with a tell.
    pub may_tell: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HubConfig {
    pub roles: BTreeMap<String, RoleSpec>,
    /// Concept → properties a told instance should have; missing ones are
    /// asked for.
    pub mandatory: Vec<(String, Vec<String>)>,
}

impl Default for HubConfig {
    fn default() -> Self {
        let role = |observes, notified, authorizes, may_tell| RoleSpec {
            observes,
            notified,
            authorizes,
            may_tell,
        };
        HubConfig {
            roles: BTreeMap::from([
                ("analyst".to_string(), role(true, true, true, true)),
                ("patrol".to_string(), role(true, true, false, true)),
                ("volunteer".to_string(), role(false, true, false, false)),
            ]),
            mandatory: vec![(
                "vehicle".to_string(),
                vec!["registration".to_string(), "direction of travel".to_string()],
            )],
        }
    }
}

/// A person (or client) taking part in conversations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    pub user: String,
    pub role: String,
    pub device: Device,
    /// Spatial area the participant's device reports, if any.
    pub location: Option<String>,
    /// Sum of the interpretation scores of accepted reports.
    pub score: u32,
    pub conversations: Vec<String>,
}

/// A message from a participant, before the hub gives it an id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    #[serde(default)]
    pub conversation: Option<String>,
    pub kind: MessageKind,
    pub body: Body,
    #[serde(default)]
    pub in_reply_to: Option<String>,
}

impl Post {
    pub fn new(kind: MessageKind, body: Body) -> Self {
        Post {
            conversation: None,
            kind,
            body,
            in_reply_to: None,
        }
    }

    pub fn in_conversation(mut self, conversation: &str) -> Self {
        self.conversation = Some(conversation.to_string());
        self
    }

    pub fn replying_to(mut self, message: &str) -> Self {
        self.in_reply_to = Some(message.to_string());
        self
    }
}

#[derive(Debug, Clone)]
pub struct Hub {
    kb: KnowledgeBase,
    rules: Vec<Rule>,
    templates: Vec<GistTemplate>,
    sam: Sam,
    gists: GistStore,
    subscriptions: Subscriptions,
    flow: Flow,
    config: HubConfig,
    interpreter: Interpreter,
    pool: IdPool,
    participants: BTreeMap<String, Participant>,
    conversations: BTreeMap<String, Conversation>,
    /// Subscription id → conversation its deliveries go to.
    standing: BTreeMap<u64, String>,
    /// Conversation → task whose asset it asks to authorise.
    authorizations: BTreeMap<String, String>,
    next_message: u64,
    next_conversation: u64,
    next_participant: u64,
}

impl Hub {
    pub fn new(kb: KnowledgeBase, rules: Vec<Rule>, templates: Vec<GistTemplate>, sam: Sam, config: HubConfig) -> Hub {
        Hub {
            kb,
            rules,
            templates,
            sam,
            gists: GistStore::new(),
            subscriptions: Subscriptions::new(),
            flow: Flow::bundled(),
            config,
            interpreter: Interpreter::default(),
            pool: IdPool::new(),
            participants: BTreeMap::new(),
            conversations: BTreeMap::new(),
            standing: BTreeMap::new(),
            authorizations: BTreeMap::new(),
            next_message: 0,
            next_conversation: 0,
            next_participant: 0,
        }
    }

    /// The bundled model, rules, templates and catalogue.
    pub fn bundled() -> Hub {
        Hub::new(
            crate::bundled::moira_kb(),
            crate::bundled::moira_rules(),
            crate::bundled::gist_templates(),
            Sam::bundled(),
            HubConfig::default(),
        )
    }

    /// A hub built from `sources`, with an empty conversation history.
    pub fn from_sources(sources: &Sources, tasking: TaskingConfig, config: HubConfig) -> Result<Hub, HubError> {
        let kb = sources.model_kb()?;
        let sam = sources.sam(tasking)?;
        let templates = sources.templates(&kb, &sam)?;
        Ok(Hub::new(kb, sources.rules()?, templates, sam, config))
    }

    pub fn with_flow(mut self, flow: Flow) -> Hub {
        self.flow = flow;
        self
    }

    pub fn with_interpreter(mut self, interpreter: Interpreter) -> Hub {
        self.interpreter = interpreter;
        self
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    /// Replaces the knowledge base, e.g. with one restored from disk.
    pub fn set_kb(&mut self, kb: KnowledgeBase) {
        self.kb = kb;
    }

    pub fn sam(&self) -> &Sam {
        &self.sam
    }

    pub fn gists(&self) -> &GistStore {
        &self.gists
    }

    pub fn config(&self) -> &HubConfig {
        &self.config
    }

    pub fn conversation(&self, id: &str) -> Option<&Conversation> {
        self.conversations.get(id)
    }

    pub fn conversations(&self) -> impl Iterator<Item = &Conversation> {
        self.conversations.values()
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants.get(id)
    }

    pub fn participants(&self) -> impl Iterator<Item = &Participant> {
        self.participants.values()
    }

    /// Adds CE (model or facts) from a file or upload.
    pub fn load(&mut self, text: &str) -> Result<LoadSummary, HubError> {
        Ok(load_document(&mut self.kb, text, &crate::bundled::model_provenance())?)
    }

    /// Registers a participant; each call makes a new one.
    pub fn join(&mut self, user: &str, role: &str, device: Device, location: Option<&str>) -> Result<Participant, HubError> {
        let role = fold(role);
        if !self.config.roles.contains_key(&role) {
            return Err(HubError::UnknownRole(role));
        }
        self.next_participant += 1;
        let p = Participant {
            id: format!("s{}", self.next_participant),
            user: user.to_string(),
            role,
            device,
            location: location.map(str::to_string),
            score: 0,
            conversations: Vec::new(),
        };
        self.participants.insert(p.id.clone(), p.clone());
        Ok(p)
    }

    pub fn leave(&mut self, id: &str) -> bool {
        self.participants.remove(id).is_some()
    }

    /// Handles a participant's message. Returns every message it caused, the
    /// posted one first; refused moves come back as a single error message
    /// to the sender and change nothing.
    pub fn post(&mut self, from: &str, post: Post, now: DateTime<Utc>) -> Result<Vec<Message>, HubError> {
        let who = self
            .participants
            .get(from)
            .cloned()
            .ok_or_else(|| HubError::UnknownParticipant(from.to_string()))?;
        let mut out = Vec::new();
        let conversation = post.conversation.clone();
        let reply_to = post.in_reply_to.clone();
        if let Err(message) = self.handle(&who, post, now, &mut out) {
            out.clear();
            let id = self.message_id();
            out.push(Message {
                id,
                conversation: conversation.unwrap_or_default(),
                sender: MOIRA.to_string(),
                audience: vec![who.id.clone()],
                kind: MessageKind::Error,
                body: Body::Error { message },
                in_reply_to: reply_to,
                timestamp: now,
            });
        }
        Ok(out)
    }

    fn message_id(&mut self) -> String {
        self.next_message += 1;
        format!("m{}", self.next_message)
    }

    fn conversation_id(&mut self) -> String {
        self.next_conversation += 1;
        format!("c{}", self.next_conversation)
    }

    fn role(&self, p: &Participant) -> RoleSpec {
        self.config.roles.get(&p.role).cloned().unwrap_or(RoleSpec {
            observes: false,
            notified: false,
            authorizes: false,
            may_tell: false,
        })
    }

    /// Participants allowed to watch machine-to-machine traffic.
    fn observers(&self) -> Vec<String> {
        self.participants
            .values()
            .filter(|p| self.role(p).observes)
            .map(|p| p.id.clone())
            .collect()
    }
}
