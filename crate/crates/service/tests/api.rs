use std::sync::Arc;
use std::time::Duration;

use axum::body::Body as HttpBody;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{TimeZone, Utc};
use futures_util::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite;
use tower::ServiceExt;

use moira_core::hub::Hub;
use moira_core::persist;
use moira_service::{parse_pattern, router, AppState, ServiceConfig};

const SUSPECT: &str = "there is a person named p1 that is known as 'John Smith' and is a suspect.
the person p1 has DEF456 as linked vehicle registration.
there is a vehicle named v47.";
const REPORT: &str = "Suspicious vehicle heading south: black saloon with license plate DEF456";

fn state(kb_path: Option<std::path::PathBuf>) -> AppState {
    let clock = Arc::new(|| Utc.with_ymd_and_hms(2024, 5, 1, 9, 30, 0).unwrap());
    AppState::with_clock(Hub::bundled(), kb_path, clock)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(HttpBody::from(b.to_string())),
        None => req.body(HttpBody::empty()),
    }
    .unwrap();
    send(app, req).await
}

async fn send(app: &Router, req: Request<HttpBody>) -> (StatusCode, Value) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn load(app: &Router, ce: &str) -> (StatusCode, Value) {
    let req = Request::post("/kb/model").header("content-type", "text/plain").body(HttpBody::from(ce.to_string())).unwrap();
    send(app, req).await
}

async fn join(app: &Router, role: &str, location: Option<&str>) -> String {
    let (status, p) = call(app, "POST", "/sessions", Some(json!({"user": "PC Jones", "role": role, "location": location}))).await;
    assert_eq!(status, StatusCode::CREATED, "{p}");
    p["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn spot_report_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let kb_path = dir.path().join("kb.ce");
    let app = router(state(Some(kb_path.clone())));
    let (status, summary) = load(&app, SUSPECT).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(summary["instances"], json!(["p1", "v47"]));

    let analyst = join(&app, "analyst", None).await;
    let patrol = join(&app, "patrol", Some("North Road")).await;
    let report = json!({"kind": "nl_input", "body": {"type": "text", "text": REPORT}});
    let (status, out) = call(&app, "POST", &format!("/sessions/{patrol}/messages"), Some(report)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(out[1]["kind"], "ce_confirm_request");
    assert!(out[1]["body"]["ce"].as_str().unwrap().starts_with("there is a vehicle named v48 that has DEF456"));
    let (_, facts) = call(&app, "GET", "/kb/facts?pattern=v48", None).await;
    assert_eq!(facts, json!([]), "nothing is asserted before acceptance");

    let conv = out[0]["conversation"].as_str().unwrap().to_string();
    let accept = json!({
        "conversation": conv,
        "kind": "confirm_accept",
        "body": {"type": "empty"},
        "in_reply_to": out[1]["id"],
    });
    let (status, out) = call(&app, "POST", &format!("/sessions/{patrol}/messages"), Some(accept)).await;
    assert_eq!(status, StatusCode::OK);
    let kinds: Vec<&str> = out.as_array().unwrap().iter().map(|m| m["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["confirm_accept", "tell", "tell", "gist", "gist"]);
    for m in out.as_array().unwrap() {
        let keys: Vec<&str> = m.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["audience", "body", "conversation", "id", "in_reply_to", "kind", "sender", "timestamp"]);
    }

    let (_, facts) = call(&app, "GET", "/kb/facts?pattern=v48|colour|*", None).await;
    assert_eq!(facts.as_array().unwrap().len(), 1);
    assert_eq!(facts[0]["ce"], "the vehicle v48 has the colour black as colour.");
    assert_eq!(facts[0]["provenance"]["source"], "PC Jones");
    let (_, sightings) = call(&app, "GET", "/kb/facts?type=suspect%20sighting", None).await;
    assert_eq!(sightings.as_array().unwrap().len(), 2);
    assert_eq!(sightings[0]["subject"], "SS_v48");
    let (_, types) = call(&app, "GET", "/kb/facts?pattern=v48|is%20a", None).await;
    assert_eq!(types[0]["ce"], "the vehicle v48 is a moving thing.");
    let (_, typed) = call(&app, "GET", "/kb/facts?type=task", None).await;
    assert!(typed.as_array().unwrap().is_empty(), "tasks live with the tasking agent");

    let (status, c) = call(&app, "GET", &format!("/conversations/{conv}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(c["transcript"].as_array().unwrap().len(), 3);
    let (status, who) = call(&app, "GET", &format!("/sessions/{analyst}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(who["role"], "analyst");
    assert!(!who["conversations"].as_array().unwrap().is_empty());

    // The knowledge base file follows every change.
    let saved = persist::load_from(&kb_path).unwrap();
    assert!(saved.is_a("SS_v48", "suspect sighting"));
}

#[tokio::test]
async fn errors_are_json_with_a_status() {
    let app = router(state(None));
    let (status, e) = call(&app, "GET", "/sessions/s9", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(e["error"], "no session 's9'");
    let (status, _) = call(&app, "GET", "/conversations/c9", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let msg = json!({"kind": "nl_input", "body": {"type": "text", "text": "x"}});
    let (status, _) = call(&app, "POST", "/sessions/s9/messages", Some(msg)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, e) = call(&app, "POST", "/sessions", Some(json!({"user": "x", "role": "admiral"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(e["error"], "unknown role 'admiral'");
    let (status, e) = load(&app, "there is a spaceship named x1.").await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{e}");
    let (status, _) = call(&app, "GET", "/kb/facts?pattern=a|b|c|d", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    // Protocol refusals are messages, not HTTP errors.
    let s = join(&app, "patrol", None).await;
    let why = json!({"kind": "why", "body": {"type": "text", "text": "v47"}});
    let (status, out) = call(&app, "POST", &format!("/sessions/{s}/messages"), Some(why)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(out[0]["kind"], "error");
    assert_eq!(out[0]["audience"], json!([s]));
}

#[test]
fn patterns() {
    let p = parse_pattern("v48|colour").unwrap();
    assert_eq!(p.subject.as_deref(), Some("v48"));
    assert!(p.object.is_none());
    assert!(parse_pattern("").unwrap().subject.is_none());
    assert!(matches!(parse_pattern("*|is a|vehicle").unwrap().property, Some(moira_core::kernel::PropertySelector::IsA)));
}

#[test]
fn configuration_from_the_environment() {
    let c = ServiceConfig::from_vars([
        ("MOIRA_LISTEN", "0.0.0.0:9000"),
        ("MOIRA_KB", "/var/lib/moira/kb.ce"),
        ("MOIRA_MODES", "high=authorize, low=auto"),
        ("PATH", "/usr/bin"),
    ])
    .unwrap();
    assert_eq!(c.listen.port(), 9000);
    assert_eq!(c.kb_path.as_deref(), Some(std::path::Path::new("/var/lib/moira/kb.ce")));
    use moira_core::tasking::{Mode, Priority};
    assert_eq!(c.modes[&Priority::High], Mode::Authorize);
    assert_eq!(c.modes[&Priority::Low], Mode::Auto);
    assert_eq!(c.modes[&Priority::Medium], Mode::Authorize);
    assert!(ServiceConfig::from_vars([("MOIRA_LISTEN", "nowhere")]).is_err());
    assert!(ServiceConfig::from_vars([("MOIRA_MODES", "high=maybe")]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("kb.ce");
    let mut seeded = Hub::bundled();
    seeded.load(SUSPECT).unwrap();
    persist::save_to(seeded.kb(), &kb).unwrap();
    let c = ServiceConfig::from_vars([("MOIRA_KB", kb.to_str().unwrap())]).unwrap();
    assert!(c.hub().unwrap().kb().contains_instance("p1"));
    let missing = ServiceConfig::from_vars([("MOIRA_RULES", "/nonexistent.rules")]).unwrap();
    assert!(missing.hub().unwrap_err().to_string().contains("/nonexistent.rules"));
}

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn next(ws: &mut Ws) -> Value {
    let frame = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.expect("frame in time").unwrap().unwrap();
    match frame {
        tungstenite::Message::Text(t) => serde_json::from_str(&t).unwrap(),
        other => panic!("{other:?}"),
    }
}

#[tokio::test]
async fn stream_delivers_message_json() {
    let state = state(None);
    state.hub().load(SUSPECT).unwrap();
    let app = router(state.clone());
    let patrol = join(&app, "patrol", Some("North Road")).await;
    let analyst = join(&app, "analyst", None).await;

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{patrol}/stream")).await.unwrap();
    let (mut watch, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{analyst}/stream")).await.unwrap();
    let report = json!({"kind": "nl_input", "body": {"type": "text", "text": REPORT}});
    ws.send(tungstenite::Message::Text(report.to_string().into())).await.unwrap();
    let echoed = next(&mut ws).await;
    assert_eq!(echoed["kind"], "nl_input");
    assert_eq!(echoed["sender"], patrol.as_str());
    let proposal = next(&mut ws).await;
    assert_eq!(proposal["kind"], "ce_confirm_request");
    for key in ["id", "conversation", "sender", "audience", "kind", "body", "in_reply_to", "timestamp"] {
        assert!(proposal.get(key).is_some(), "{key} missing");
    }
    assert_eq!(proposal["in_reply_to"], echoed["id"]);
    assert_eq!(proposal["timestamp"], "2024-05-01T09:30:00Z");

    let accept = json!({
        "conversation": proposal["conversation"],
        "kind": "confirm_accept",
        "body": {"type": "empty"},
        "in_reply_to": proposal["id"],
    });
    ws.send(tungstenite::Message::Text(accept.to_string().into())).await.unwrap();
    let mut kinds = Vec::new();
    for _ in 0..4 {
        kinds.push(next(&mut ws).await["kind"].as_str().unwrap().to_string());
    }
    assert_eq!(kinds, ["confirm_accept", "tell", "tell", "gist"]);

    // The analyst's stream saw the machine traffic and its own gist, but
    // not the patrol's private proposal.
    let mut seen = Vec::new();
    for _ in 0..3 {
        seen.push(next(&mut watch).await["kind"].as_str().unwrap().to_string());
    }
    assert_eq!(seen, ["tell", "tell", "gist"]);

    ws.send(tungstenite::Message::Text("not json".into())).await.unwrap();
    let err = next(&mut ws).await;
    assert!(err["error"].as_str().unwrap().starts_with("bad message"));

    let refused = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/s99/stream")).await;
    assert!(refused.is_err());
}
