//! Per-kind handling of participants' messages and the cascade that follows
//! a change to the knowledge base.
//!
//! Handlers check everything that can fail before touching any state, so a
//! refused message leaves the hub exactly as it was.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};

use crate::ce::{assert_statements, describe_instance, parse_statements, render_statements, CeStatement, Clause, ClauseValue};
use crate::fusion::{rationale, run_rules, Delivery, Subject};
use crate::gist::{gist, GistContext, Purpose};
use crate::kernel::{FactPattern, KnowledgeBase, Provenance};
use crate::protocol::{Body, Conversation, Message, MessageKind};
use crate::tasking::Decision;

use super::{Hub, Participant, Post, FUSION, MOIRA, SAM};

type Handled = Result<(), String>;

/// Kinds people never send: proposals, summaries and answers come from
/// agents, so a person cannot confirm CE they proposed themselves.
pub const AGENT_ONLY: [MessageKind; 5] = [
    MessageKind::CeConfirmRequest,
    MessageKind::Gist,
    MessageKind::Expand,
    MessageKind::Because,
    MessageKind::Error,
];

impl Hub {
    pub(super) fn handle(&mut self, who: &Participant, post: Post, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        if AGENT_ONLY.contains(&post.kind) {
            return Err(format!("only agents send {} messages", post.kind));
        }
        let conv = match &post.conversation {
            Some(c) if !self.conversations.contains_key(c) => return Err(format!("no conversation '{c}'")),
            Some(c) => c.clone(),
            None => self.conversation_id(),
        };
        let id = self.message_id();
        let msg = Message {
            id,
            conversation: conv.clone(),
            sender: who.id.clone(),
            audience: vec![who.id.clone(), MOIRA.to_string()],
            kind: post.kind,
            body: post.body,
            in_reply_to: post.in_reply_to,
            timestamp: now,
        };
        self.check(&msg)?;
        match msg.kind {
            MessageKind::NlInput => self.on_report(who, msg, now, out),
            MessageKind::ConfirmCorrect => self.on_correct(who, msg, now, out),
            MessageKind::ConfirmAccept => self.on_accept(who, msg, now, out),
            MessageKind::Ask => self.on_ask(who, msg, now, out),
            MessageKind::Tell => self.on_tell(who, msg, now, out),
            MessageKind::ExpandRequest => self.on_expand(who, msg, now, out),
            MessageKind::Why => self.on_why(who, msg, now, out),
            // Anything else a person may legally say is recorded without reply.
            _ => self.record(msg, out),
        }
    }

    fn check(&self, msg: &Message) -> Handled {
        let fresh;
        let conv = match self.conversations.get(&msg.conversation) {
            Some(c) => c,
            None => {
                fresh = Conversation::new(&msg.conversation);
                &fresh
            }
        };
        conv.check(msg, &self.flow).map(|_| ()).map_err(|e| e.to_string())
    }

    /// Adds a message to its conversation (creating it if new).
    fn record(&mut self, msg: Message, out: &mut Vec<Message>) -> Handled {
        let conv = self
            .conversations
            .entry(msg.conversation.clone())
            .or_insert_with(|| Conversation::new(&msg.conversation));
        conv.apply(msg.clone(), &self.flow).map_err(|e| e.to_string())?;
        for who in std::iter::once(&msg.sender).chain(&msg.audience) {
            if let Some(p) = self.participants.get_mut(who) {
                if !p.conversations.contains(&msg.conversation) {
                    p.conversations.push(msg.conversation.clone());
                }
            }
        }
        out.push(msg);
        Ok(())
    }

    /// Like `record`, for messages the hub itself composes; those are legal
    /// by construction, so a refusal is a bug.
    fn send(&mut self, msg: Message, out: &mut Vec<Message>) {
        if let Err(e) = self.record(msg, out) {
            debug_assert!(false, "hub composed an illegal move: {e}");
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn compose(
        &mut self,
        conversation: &str,
        sender: &str,
        audience: Vec<String>,
        kind: MessageKind,
        body: Body,
        in_reply_to: Option<&str>,
        now: DateTime<Utc>,
    ) -> Message {
        Message {
            id: self.message_id(),
            conversation: conversation.to_string(),
            sender: sender.to_string(),
            audience,
            kind,
            body,
            in_reply_to: in_reply_to.map(str::to_string),
            timestamp: now,
        }
    }

    fn to_person(&self, who: &str) -> Vec<String> {
        vec![MOIRA.to_string(), who.to_string()]
    }

    /// Machine-to-machine audiences include every observer.
    fn between_agents(&self, a: &str, b: &str) -> Vec<String> {
        let mut v = vec![a.to_string(), b.to_string()];
        v.extend(self.observers());
        v
    }

    // ---- confirm -------------------------------------------------------

    fn on_report(&mut self, who: &Participant, msg: Message, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        let text = match &msg.body {
            Body::Text { text } => text.clone(),
            _ => unreachable!("checked by the conversation"),
        };
        let (conv, reply_to) = (msg.conversation.clone(), msg.id.clone());
        self.record(msg, out)?;
        let body = self.interpretation_body(who, &text);
        let request = self.compose(
            &conv,
            MOIRA,
            self.to_person(&who.id),
            MessageKind::CeConfirmRequest,
            body,
            Some(&reply_to),
            now,
        );
        self.send(request, out);
        Ok(())
    }

    fn interpretation_body(&mut self, who: &Participant, text: &str) -> Body {
        let found = self.interpreter.interpret_with(&self.kb, text, &mut self.pool);
        let ce = found.ce();
        let ctx = GistContext::new(&who.role, who.device, Purpose::Confirm);
        let summary = gist(&found.statements, &self.templates, &ctx, &[&self.kb]);
        Body::Confirm {
            statements: found.statements,
            ce,
            gist: summary.text,
            score: found.score,
            unmatched: found.unmatched_words,
        }
    }

    fn confirm_body(&self, who: &Participant, statements: Vec<CeStatement>, score: u32) -> Body {
        let ctx = GistContext::new(&who.role, who.device, Purpose::Confirm);
        let summary = gist(&statements, &self.templates, &ctx, &[&self.kb]);
        Body::Confirm {
            ce: render_statements(&statements),
            statements,
            gist: summary.text,
            score,
            unmatched: Vec::new(),
        }
    }

    /// Checks that CE parses and would assert cleanly; returns the
    /// statements and the knowledge base with them asserted.
    fn trial(&self, ce: &str, provenance: &Provenance) -> Result<(Vec<CeStatement>, KnowledgeBase), String> {
        let statements = parse_statements(ce).map_err(|e| e.to_string())?;
        let mut scratch = self.kb.clone();
        assert_statements(&mut scratch, &statements, provenance).map_err(|e| e.to_string())?;
        Ok((statements, scratch))
    }

    fn on_correct(&mut self, who: &Participant, msg: Message, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        let (conv, reply_to) = (msg.conversation.clone(), msg.id.clone());
        if let Some(task) = self.authorizations.get(&conv).cloned() {
            // Correcting an authorisation request turns the asset down.
            if !self.sam.has_alternative(&task) {
                return Err(format!("no other asset can take task {task}"));
            }
            self.record(msg, out)?;
            let decision = self.sam.reject(&task).map_err(|e| e.to_string())?;
            if let Decision::Offer { .. } = decision {
                let body = self.authorization_body(who, &decision);
                let m = self.compose(&conv, MOIRA, self.to_person(&who.id), MessageKind::CeConfirmRequest, body, Some(&reply_to), now);
                self.send(m, out);
            }
            return Ok(());
        }
        let body = match &msg.body {
            Body::Text { text } => {
                let text = text.clone();
                self.record(msg, out)?;
                self.interpretation_body(who, &text)
            }
            Body::Ce { ce } => {
                let (statements, _) = self.trial(ce, &self.told(who, &conv, now))?;
                self.record(msg, out)?;
                self.confirm_body(who, statements, 0)
            }
            _ => unreachable!("checked by the conversation"),
        };
        let m = self.compose(&conv, MOIRA, self.to_person(&who.id), MessageKind::CeConfirmRequest, body, Some(&reply_to), now);
        self.send(m, out);
        Ok(())
    }

    fn told(&self, who: &Participant, conversation: &str, now: DateTime<Utc>) -> Provenance {
        Provenance::Told {
            source: who.user.clone(),
            conversation: Some(conversation.to_string()),
            timestamp: now,
        }
    }

    fn on_accept(&mut self, who: &Participant, msg: Message, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        let conv = msg.conversation.clone();
        if let Some(task) = self.authorizations.get(&conv).cloned() {
            let decision = self
                .sam
                .accept(&task, &self.told(who, &conv, now))
                .map_err(|e| e.to_string())?;
            self.record(msg, out)?;
            self.authorizations.remove(&conv);
            self.after_decision(decision, now, out);
            return Ok(());
        }
        let pending = self.conversations[&conv].pending.clone().expect("checked by the conversation");
        let provenance = self.told(who, &conv, now);
        let mut scratch = self.kb.clone();
        assert_statements(&mut scratch, &pending.statements, &provenance).map_err(|e| e.to_string())?;
        locate(&mut scratch, &pending.statements, who, &provenance);
        self.record(msg, out)?;
        self.kb = scratch;
        if let Some(p) = self.participants.get_mut(&who.id) {
            p.score += pending.score;
        }
        self.cascade(now, out);
        Ok(())
    }

    // ---- ask / tell ----------------------------------------------------

    fn on_ask(&mut self, who: &Participant, msg: Message, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        let (pattern, standing) = match &msg.body {
            Body::Query { pattern, standing, .. } => (pattern.clone(), *standing),
            _ => unreachable!("checked by the conversation"),
        };
        let (conv, reply_to) = (msg.conversation.clone(), msg.id.clone());
        self.record(msg, out)?;
        let (ce, matches) = answer(&self.kb, &pattern);
        if standing {
            // What matches now is in the answer; later matches are delivered.
            let (id, _) = self.subscriptions.subscribe(&self.kb, &who.id, pattern);
            self.standing.insert(id, conv.clone());
        }
        let m = self.compose(&conv, MOIRA, self.to_person(&who.id), MessageKind::Tell, Body::Answer { ce, matches }, Some(&reply_to), now);
        self.send(m, out);
        Ok(())
    }

    fn on_tell(&mut self, who: &Participant, msg: Message, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        if !self.role(who).may_tell {
            return Err(format!("a {} may not add facts", who.role));
        }
        let ce = match &msg.body {
            Body::Ce { ce } | Body::Answer { ce, .. } => ce.clone(),
            _ => unreachable!("checked by the conversation"),
        };
        let (conv, reply_to) = (msg.conversation.clone(), msg.id.clone());
        let (statements, scratch) = self.trial(&ce, &self.told(who, &conv, now))?;
        self.record(msg, out)?;
        self.kb = scratch;
        if let Some((concept, id, missing)) = self.missing_slots(&statements) {
            let text = format!(
                "What is the {} of the {concept} {id}?",
                missing.iter().map(String::as_str).collect::<Vec<_>>().join(" and the ")
            );
            let body = Body::Query {
                pattern: FactPattern::any().subject(&id),
                missing,
                standing: false,
                text,
            };
            let m = self.compose(&conv, MOIRA, self.to_person(&who.id), MessageKind::Ask, body, Some(&reply_to), now);
            self.send(m, out);
        }
        self.cascade(now, out);
        Ok(())
    }

    /// The first told instance lacking a mandatory property.
    fn missing_slots(&self, statements: &[CeStatement]) -> Option<(String, String, Vec<String>)> {
        for s in statements {
            let Some((_, id)) = s.subject() else { continue };
            for (concept, props) in &self.config.mandatory {
                if !self.kb.is_a(id, concept) {
                    continue;
                }
                let missing: Vec<String> = props.iter().filter(|p| self.kb.values(id, p).is_empty()).cloned().collect();
                if !missing.is_empty() {
                    return Some((concept.clone(), id.to_string(), missing));
                }
            }
        }
        None
    }

    // ---- gist / expand, why ---------------------------------------------

    fn on_expand(&mut self, who: &Participant, msg: Message, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        let id = match &msg.body {
            Body::Text { text } => text.trim().to_string(),
            _ => unreachable!("checked by the conversation"),
        };
        let ce = self.gists.get(&id).map_err(|e| e.to_string())?.ce.clone();
        let (conv, reply_to) = (msg.conversation.clone(), msg.id.clone());
        self.record(msg, out)?;
        let m = self.compose(&conv, MOIRA, self.to_person(&who.id), MessageKind::Expand, Body::Ce { ce }, Some(&reply_to), now);
        self.send(m, out);
        Ok(())
    }

    fn on_why(&mut self, who: &Participant, msg: Message, now: DateTime<Utc>, out: &mut Vec<Message>) -> Handled {
        let text = match &msg.body {
            Body::Text { text } => text.trim().to_string(),
            _ => unreachable!("checked by the conversation"),
        };
        // Tasks live with the tasking agent; everything else in the world.
        let why = [&self.kb, self.sam.kb()]
            .into_iter()
            .find_map(|kb| Subject::resolve(kb, &text).ok().and_then(|s| rationale(kb, &s).ok()))
            .ok_or_else(|| format!("nothing is known about '{text}'"))?;
        let (conv, reply_to) = (msg.conversation.clone(), msg.id.clone());
        self.record(msg, out)?;
        let body = Body::Rationale {
            subject: text,
            rule: why.rule,
            premises: why.premises,
            ce: why.text,
        };
        let m = self.compose(&conv, MOIRA, self.to_person(&who.id), MessageKind::Because, body, Some(&reply_to), now);
        self.send(m, out);
        Ok(())
    }

    // ---- cascade ---------------------------------------------------------

    /// Runs the rules over the committed change, delivers subscriptions and
    /// hands new triggers to the tasking agent.
    fn cascade(&mut self, now: DateTime<Utc>, out: &mut Vec<Message>) {
        let report = match run_rules(&mut self.kb, &self.rules) {
            Ok(r) => r,
            Err(e) => {
                let m = self.compose("", FUSION, self.observers(), MessageKind::Error, Body::Error { message: e.to_string() }, None, now);
                out.push(m);
                return;
            }
        };
        self.deliver(now, out);
        for inst in report.new_instances {
            if self.sam.is_trigger(&self.kb, &inst) {
                self.task(&inst, now, out);
            }
        }
    }

    fn deliver(&mut self, now: DateTime<Utc>, out: &mut Vec<Message>) {
        let deliveries = self.subscriptions.poll(&self.kb);
        let mut by_sub: Vec<(u64, String, Vec<String>)> = Vec::new();
        for Delivery { subscription, subscriber, fact } in deliveries {
            let Some(subject) = self.kb.fact(fact).map(|f| f.subject.clone()) else { continue };
            match by_sub.iter_mut().find(|(s, _, _)| *s == subscription) {
                Some((_, _, subjects)) if !subjects.contains(&subject) => subjects.push(subject),
                Some(_) => {}
                None => by_sub.push((subscription, subscriber, vec![subject])),
            }
        }
        for (sub, subscriber, subjects) in by_sub {
            if !self.participants.contains_key(&subscriber) {
                continue;
            }
            let statements: Vec<CeStatement> = subjects.iter().filter_map(|s| describe_instance(&self.kb, s)).collect();
            let ce = render_statements(&statements);
            let audience = vec![FUSION.to_string(), subscriber.clone()];
            let conv = self.standing.get(&sub).cloned().unwrap_or_default();
            let last = self.conversations.get(&conv).and_then(|c| c.transcript.last()).map(|m| m.id.clone());
            let m = self.compose(&conv, FUSION, audience, MessageKind::Tell, Body::Ce { ce }, last.as_deref(), now);
            if self.check(&m).is_ok() && self.conversations.contains_key(&conv) {
                self.send(m, out);
            } else {
                // The standing conversation has moved on; start a new one.
                let fresh = self.conversation_id();
                self.standing.insert(sub, fresh.clone());
                let m = Message {
                    conversation: fresh,
                    in_reply_to: None,
                    ..m
                };
                self.send(m, out);
            }
        }
    }

    fn task(&mut self, trigger: &str, now: DateTime<Utc>, out: &mut Vec<Message>) {
        let conv = self.conversation_id();
        let Some(described) = describe_instance(&self.kb, trigger) else { return };
        let tell = self.compose(
            &conv,
            FUSION,
            self.between_agents(FUSION, SAM),
            MessageKind::Tell,
            Body::Ce { ce: render_statements(&[described]) },
            None,
            now,
        );
        let tell_id = tell.id.clone();
        self.send(tell, out);
        let provenance = Provenance::Told {
            source: SAM.to_string(),
            conversation: Some(conv.clone()),
            timestamp: now,
        };
        let decision = match self.sam.on_trigger(&self.kb, trigger, &provenance) {
            Ok(d) => d,
            Err(e) => {
                let m = self.compose(&conv, SAM, self.between_agents(SAM, FUSION), MessageKind::Error, Body::Error { message: e.to_string() }, Some(&tell_id), now);
                out.push(m);
                return;
            }
        };
        let reply = self.compose(
            &conv,
            SAM,
            self.between_agents(SAM, MOIRA),
            MessageKind::Tell,
            Body::Ce { ce: render_statements(&decision.statements()) },
            Some(&tell_id),
            now,
        );
        self.send(reply, out);
        self.after_decision(decision, now, out);
    }

    /// Notifies people of an assignment, or asks them to authorise an offer.
    fn after_decision(&mut self, decision: Decision, now: DateTime<Utc>, out: &mut Vec<Message>) {
        match &decision {
            Decision::Assigned { .. } => {
                let statements = decision.statements();
                let people: Vec<Participant> = self.participants.values().filter(|p| self.role(p).notified).cloned().collect();
                for p in people {
                    let ctx = GistContext::new(&p.role, p.device, Purpose::Notify);
                    let descriptor = gist(&statements, &self.templates, &ctx, &[self.sam.kb(), &self.kb]);
                    let id = self.gists.put(statements.clone(), descriptor.clone()).id.clone();
                    let conv = self.conversation_id();
                    let m = self.compose(&conv, MOIRA, self.to_person(&p.id), MessageKind::Gist, Body::Gist { gist: id, descriptor }, None, now);
                    self.send(m, out);
                }
            }
            Decision::Offer { task, .. } => {
                let people: Vec<Participant> = self.participants.values().filter(|p| self.role(p).authorizes).cloned().collect();
                for p in people {
                    let conv = self.conversation_id();
                    let body = self.authorization_body(&p, &decision);
                    let m = self.compose(&conv, MOIRA, self.to_person(&p.id), MessageKind::CeConfirmRequest, body, None, now);
                    self.send(m, out);
                    self.authorizations.insert(conv, task.id.clone());
                }
            }
            Decision::Unmatched { .. } | Decision::Known { .. } => {}
        }
    }

    fn authorization_body(&self, who: &Participant, decision: &Decision) -> Body {
        let statements = decision.statements();
        let ctx = GistContext::new(&who.role, who.device, Purpose::Authorize);
        let summary = gist(&statements, &self.templates, &ctx, &[self.sam.kb(), &self.kb]);
        Body::Confirm {
            ce: render_statements(&statements),
            statements,
            gist: summary.text,
            score: 0,
            unmatched: Vec::new(),
        }
    }
}

/// Gives reported moving things the reporter's location when the report
/// did not say where they were.
fn locate(kb: &mut KnowledgeBase, statements: &[CeStatement], who: &Participant, provenance: &Provenance) {
    let Some(area) = who.location.as_deref().filter(|a| kb.is_a(a, "spatial area")) else { return };
    let subjects: BTreeSet<&str> = statements.iter().filter_map(|s| s.subject().map(|(_, id)| id)).collect();
    for id in subjects {
        if kb.is_a(id, "moving thing") && kb.values(id, "location").is_empty() {
            let stmt = CeStatement::instance_facts(
                "moving thing",
                id,
                vec![Clause::has("location", ClauseValue::instance("spatial area", area))],
            );
            // The area is a known spatial area, so this cannot fail.
            let _ = assert_statements(kb, &[stmt], provenance);
        }
    }
}

/// CE describing every instance that has a matching fact, and how many.
pub(super) fn answer(kb: &KnowledgeBase, pattern: &FactPattern) -> (String, usize) {
    let mut subjects: Vec<&str> = Vec::new();
    for f in kb.query(pattern) {
        if !subjects.contains(&f.subject.as_str()) {
            subjects.push(&f.subject);
        }
    }
    let statements: Vec<CeStatement> = subjects.iter().filter_map(|s| describe_instance(kb, s)).collect();
    (render_statements(&statements), subjects.len())
}
