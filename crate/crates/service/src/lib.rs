//! HTTP and WebSocket access to a conversation hub.
//!
//! ```text
//! POST /sessions                    join: {user, role, device?, location?}
//! GET  /sessions/{id}               the participant
//! POST /sessions/{id}/messages      post a message; returns what it caused
//! GET  /sessions/{id}/stream        WebSocket: messages for the participant
//! GET  /conversations/{id}          transcript and state
//! GET  /kb/facts?pattern=s|p|o      facts; `*` or empty is a wildcard
//! POST /kb/model                    CE text to add
//! ```
//!
//! Every message sent over the stream is the hub's message JSON:
//! `{id, conversation, sender, audience, kind, body, in_reply_to, timestamp}`.
//! Text frames received on the stream are handled like posted messages.

mod config;

pub use config::{ConfigError, ServiceConfig};

use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::ws::{self, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::broadcast;

use moira_core::ce::{describe_fact, render_statement, LoadSummary};
use moira_core::gist::Device;
use moira_core::hub::{Hub, HubError, Participant, Post};
use moira_core::kernel::{Claim, FactId, FactPattern, PropertySelector, Provenance};
use moira_core::protocol::{Conversation, Message};

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no session '{0}'")]
    NoSession(String),
    #[error("no conversation '{0}'")]
    NoConversation(String),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Hub(#[from] HubError),
    #[error("saving the knowledge base: {0}")]
    Save(#[from] moira_core::persist::PersistError),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::NoSession(_) | ApiError::NoConversation(_) => StatusCode::NOT_FOUND,
            ApiError::Hub(HubError::UnknownParticipant(_)) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) | ApiError::Hub(_) => StatusCode::BAD_REQUEST,
            ApiError::Save(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

/// Shared by all requests. The hub is behind one lock, which also keeps
/// knowledge-base writes in order.
#[derive(Clone)]
pub struct AppState {
    hub: Arc<Mutex<Hub>>,
    messages: broadcast::Sender<Message>,
    kb_path: Option<PathBuf>,
    clock: Clock,
}

impl AppState {
    pub fn new(hub: Hub, kb_path: Option<PathBuf>) -> Self {
        Self::with_clock(hub, kb_path, Arc::new(Utc::now))
    }

    pub fn with_clock(hub: Hub, kb_path: Option<PathBuf>, clock: Clock) -> Self {
        let (messages, _) = broadcast::channel(1024);
        AppState {
            hub: Arc::new(Mutex::new(hub)),
            messages,
            kb_path,
            clock,
        }
    }

    pub fn hub(&self) -> MutexGuard<'_, Hub> {
        // A panic while holding the lock leaves the hub as it was before the
        // failing request: every hub operation is all-or-nothing.
        self.hub.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Posts for `session`, saves the knowledge base if it changed and
    /// fans the resulting messages out to streams.
    pub fn post(&self, session: &str, post: Post) -> Result<Vec<Message>, ApiError> {
        let out = {
            let mut hub = self.hub();
            let facts = hub.kb().facts().len();
            let instances = hub.kb().instances().count();
            let out = hub.post(session, post, (self.clock)())?;
            if hub.kb().facts().len() != facts || hub.kb().instances().count() != instances {
                self.save(&hub)?;
            }
            out
        };
        for m in &out {
            // No receivers is fine.
            let _ = self.messages.send(m.clone());
        }
        Ok(out)
    }

    fn save(&self, hub: &Hub) -> Result<(), ApiError> {
        if let Some(path) = &self.kb_path {
            moira_core::persist::save_to(hub.kb(), path)?;
        }
        Ok(())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/stream", get(stream))
        .route("/conversations/{id}", get(get_conversation))
        .route("/kb/facts", get(get_facts))
        .route("/kb/model", post(post_model))
        .with_state(state)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewSession {
    pub user: String,
    pub role: String,
    #[serde(default = "desktop")]
    pub device: Device,
    #[serde(default)]
    pub location: Option<String>,
}

fn desktop() -> Device {
    Device::Desktop
}

async fn create_session(State(state): State<AppState>, Json(req): Json<NewSession>) -> Result<(StatusCode, Json<Participant>), ApiError> {
    let p = state.hub().join(&req.user, &req.role, req.device, req.location.as_deref())?;
    Ok((StatusCode::CREATED, Json(p)))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Participant>, ApiError> {
    state.hub().participant(&id).cloned().map(Json).ok_or(ApiError::NoSession(id))
}

async fn post_message(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(post): Json<Post>,
) -> Result<Json<Vec<Message>>, ApiError> {
    state.post(&id, post).map(Json)
}

async fn get_conversation(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Conversation>, ApiError> {
    state.hub().conversation(&id).cloned().map(Json).ok_or(ApiError::NoConversation(id))
}

#[derive(Debug, Deserialize)]
pub struct FactQuery {
    #[serde(default)]
    pub pattern: Option<String>,
    /// Only subjects of this concept (or a subtype).
    #[serde(default, rename = "type")]
    pub subject_type: Option<String>,
}

/// Reads `subject|property|object`; `*` or an empty part matches anything
/// and `is a` as the property selects type facts.
pub fn parse_pattern(text: &str) -> Result<FactPattern, ApiError> {
    let parts: Vec<&str> = text.split('|').map(str::trim).collect();
    if parts.len() > 3 {
        return Err(ApiError::BadRequest(format!("pattern '{text}' has more than three parts")));
    }
    let part = |i: usize| parts.get(i).copied().filter(|p| !p.is_empty() && *p != "*");
    Ok(FactPattern {
        subject: part(0).map(str::to_string),
        property: part(1).map(|p| match p {
            "is a" | "is-a" => PropertySelector::IsA,
            name => PropertySelector::Name(name.to_string()),
        }),
        object: part(2).map(str::to_string),
        subject_type: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactView {
    pub id: FactId,
    pub subject: String,
    pub claim: Claim,
    pub provenance: Provenance,
    /// The fact as one CE sentence.
    pub ce: String,
}

async fn get_facts(State(state): State<AppState>, Query(q): Query<FactQuery>) -> Result<Json<Vec<FactView>>, ApiError> {
    let mut pattern = match &q.pattern {
        Some(p) => parse_pattern(p)?,
        None => FactPattern::any(),
    };
    pattern.subject_type = q.subject_type.clone();
    let hub = state.hub();
    let kb = hub.kb();
    let facts = kb
        .query(&pattern)
        .into_iter()
        .map(|f| FactView {
            id: f.id,
            subject: f.subject.clone(),
            claim: f.claim.clone(),
            provenance: f.provenance.clone(),
            ce: render_statement(&describe_fact(kb, f)),
        })
        .collect();
    Ok(Json(facts))
}

async fn post_model(State(state): State<AppState>, body: String) -> Result<Json<LoadSummary>, ApiError> {
    let mut hub = state.hub();
    let summary = hub.load(&body)?;
    state.save(&hub)?;
    Ok(Json(summary))
}

async fn stream(State(state): State<AppState>, Path(id): Path<String>, upgrade: WebSocketUpgrade) -> Result<Response, ApiError> {
    if state.hub().participant(&id).is_none() {
        return Err(ApiError::NoSession(id));
    }
    let rx = state.messages.subscribe();
    Ok(upgrade.on_upgrade(move |socket| relay(state, id, socket, rx)))
}

/// Forwards the participant's messages to the socket, and posts what the
/// socket sends.
async fn relay(state: AppState, id: String, mut socket: WebSocket, mut rx: broadcast::Receiver<Message>) {
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(ws::Message::Text(text))) => text,
                    Some(Ok(ws::Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let reply = match serde_json::from_str::<Post>(&text) {
                    // Results come back through the broadcast like any other.
                    Ok(post) => state.post(&id, post).err().map(|e| e.to_string()),
                    Err(e) => Some(format!("bad message: {e}")),
                };
                if let Some(error) = reply {
                    let frame = serde_json::json!({ "error": error }).to_string();
                    if socket.send(ws::Message::Text(frame.into())).await.is_err() {
                        break;
                    }
                }
            }
            delivered = rx.recv() => {
                let m = match delivered {
                    Ok(m) => m,
                    Err(broadcast::error::RecvError::Lagged(n)) => {
                        tracing::warn!(session = %id, skipped = n, "stream fell behind");
                        continue;
                    }
                    Err(broadcast::error::RecvError::Closed) => break,
                };
                if m.sender != id && !m.is_for(&id) {
                    continue;
                }
                let frame = serde_json::to_string(&m).expect("messages serialise");
                if socket.send(ws::Message::Text(frame.into())).await.is_err() {
                    break;
                }
            }
        }
    }
}
