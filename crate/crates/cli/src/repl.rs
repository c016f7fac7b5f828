//! An interactive participant. Plain lines are reports; a few words at the
//! start of a line are commands:
//!
//! ```text
//! accept              accept the CE Moira proposed
//! correct <text|CE>   reword the report, or give the CE directly
//! tell <CE>           add facts
//! why <fact|id>       ask why something is believed
//! expand <gist>       show the CE behind a gist
//! quit                leave (saving the knowledge base if asked to)
//! ```
//!
//! `expand` replies to the message that carried the gist; the other
//! replies go to the conversation of the last message Moira sent us.

use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Utc};

use moira_core::ce::parse_statements;
use moira_core::gist::Device;
use moira_core::hub::{Hub, Post};
use moira_core::protocol::{Body, Message, MessageKind};

use crate::CliError;

const HELP: &str = "\
commands: accept | correct <text or CE> | tell <CE> | why <fact or id> | expand <gist> | quit
anything else is sent as a report";

/// What a line did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Keep going; the text is what to show.
    Continue(String),
    Quit,
}

pub struct Repl {
    hub: Hub,
    me: String,
    /// Conversation and message a command replies to.
    thread: Option<(String, String)>,
}

impl Repl {
    pub fn new(mut hub: Hub, user: &str, role: &str, location: Option<&str>) -> Result<Repl, CliError> {
        let me = hub.join(user, role, Device::Desktop, location)?.id;
        Ok(Repl { hub, me, thread: None })
    }

    pub fn hub(&self) -> &Hub {
        &self.hub
    }

    pub fn participant(&self) -> &str {
        &self.me
    }

    pub fn handle(&mut self, line: &str, now: DateTime<Utc>) -> Result<Step, CliError> {
        let line = line.trim();
        let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let threaded = |kind, body| (kind, body, true);
        let (kind, body, in_thread) = match word.to_ascii_lowercase().as_str() {
            "" => return Ok(Step::Continue(String::new())),
            "quit" | "exit" => return Ok(Step::Quit),
            "help" | "?" => return Ok(Step::Continue(format!("{HELP}\n"))),
            "accept" if rest.is_empty() => threaded(MessageKind::ConfirmAccept, Body::Empty),
            "correct" if !rest.is_empty() => {
                let body = if parse_statements(rest).is_ok() {
                    Body::ce(rest)
                } else {
                    Body::text(rest)
                };
                threaded(MessageKind::ConfirmCorrect, body)
            }
            "why" if !rest.is_empty() => threaded(MessageKind::Why, Body::text(rest)),
            "expand" if !rest.is_empty() => threaded(MessageKind::ExpandRequest, Body::text(rest)),
            "tell" if !rest.is_empty() => (MessageKind::Tell, Body::ce(rest), false),
            _ => (MessageKind::NlInput, Body::text(line), false),
        };
        let mut post = Post::new(kind, body);
        let thread = match kind {
            MessageKind::ExpandRequest => self.gist_message(rest).or_else(|| self.thread.clone()),
            _ => self.thread.clone(),
        };
        if in_thread {
            if let Some((conv, last)) = &thread {
                post = post.in_conversation(conv).replying_to(last);
            }
        }
        let out = self.hub.post(&self.me, post, now)?;
        let mut text = String::new();
        for m in out.iter().filter(|m| m.sender != self.me && m.is_for(&self.me)) {
            text.push_str(&show(m));
            if m.kind != MessageKind::Error {
                self.thread = Some((m.conversation.clone(), m.id.clone()));
            }
        }
        Ok(Step::Continue(text))
    }

    /// The message that brought us gist `id`.
    fn gist_message(&self, id: &str) -> Option<(String, String)> {
        self.hub
            .conversations()
            .flat_map(|c| c.transcript.iter())
            .find(|m| m.is_for(&self.me) && matches!(&m.body, Body::Gist { gist, .. } if gist == id))
            .map(|m| (m.conversation.clone(), m.id.clone()))
    }
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}

/// A message as the shell prints it.
pub fn show(m: &Message) -> String {
    let head = format!("{} ({}):", m.sender, m.kind);
    match &m.body {
        Body::Confirm {
            ce, gist, score, unmatched, ..
        } => {
            let mut s = format!("{head} {gist}\n{}", indent(ce));
            s.push_str(&format!("  score: {score}"));
            if !unmatched.is_empty() {
                s.push_str(&format!("; unmatched: {}", unmatched.join(" ")));
            }
            s.push_str("\n  (accept, or correct ...)\n");
            s
        }
        Body::Gist { gist, descriptor } => format!("{head} [{gist}] {}\n", descriptor.text),
        Body::Ce { ce } | Body::Answer { ce, .. } | Body::Rationale { ce, .. } => format!("{head}\n{}", indent(ce)),
        Body::Query { text, missing, .. } if !missing.is_empty() => {
            format!("{head} {text} (missing: {})\n", missing.join(", "))
        }
        Body::Query { text, .. } | Body::Text { text } => format!("{head} {text}\n"),
        Body::Error { message } => format!("error: {message}\n"),
        Body::Empty => format!("{head}\n"),
    }
}

/// Runs the shell until `quit` or end of input. The knowledge base is saved
/// to `kb_out` on the way out.
pub fn cmd_repl<R: BufRead, W: Write>(
    mut repl: Repl,
    input: R,
    mut out: W,
    kb_out: Option<&Path>,
    mut clock: impl FnMut() -> DateTime<Utc>,
) -> Result<Repl, CliError> {
    writeln!(out, "joined as {} ({})\n{HELP}", repl.participant(), repl.hub().participant(repl.participant()).map_or("", |p| p.role.as_str()))
        .map_err(CliError::Output)?;
    for line in input.lines() {
        let line = line.map_err(|source| CliError::Io {
            path: "<stdin>".into(),
            source,
        })?;
        match repl.handle(&line, clock())? {
            Step::Quit => break,
            Step::Continue(text) => out.write_all(text.as_bytes()).map_err(CliError::Output)?,
        }
        out.flush().map_err(CliError::Output)?;
    }
    if let Some(path) = kb_out {
        moira_core::persist::save_to(repl.hub().kb(), path)?;
        writeln!(out, "saved knowledge base to {}", path.display()).map_err(CliError::Output)?;
    }
    Ok(repl)
}
