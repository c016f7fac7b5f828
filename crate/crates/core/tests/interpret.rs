use std::time::{Duration, Instant};

use moira_core::bundled::{model_provenance, moira_kb};
use moira_core::ce::{assert_statements, load_document, parse_statements, render_statements};
use moira_core::interpret::{interpret, Interpreter};
use moira_core::kernel::{Element, KnowledgeBase};

const REPORT: &str = "Suspicious vehicle heading south: black saloon with license plate DEF456";
const LISTING: &str = "there is a vehicle named v48 that
   has DEF456 as registration and
   has the colour black as colour and
   has the vehicle body type saloon as body type and
   is a moving thing.
  there is a moving thing named v48 that
   has the direction south as direction of travel.";

fn kb_with_v47() -> KnowledgeBase {
    let mut kb = moira_kb();
    load_document(&mut kb, "there is a vehicle named v47.", &model_provenance()).unwrap();
    kb
}

#[test]
fn spot_report_matches_listing() {
    let kb = kb_with_v47();
    let started = Instant::now();
    let out = interpret(&kb, REPORT);
    assert!(started.elapsed() < Duration::from_secs(1));
    assert_eq!(out.statements, parse_statements(LISTING).unwrap(), "{}", out.ce());
    assert_eq!(out.score, 6);
    assert_eq!(out.unmatched_words, vec!["Suspicious".to_string(), "with".to_string()]);
}

#[test]
fn spot_report_spans() {
    let out = interpret(&moira_kb(), REPORT);
    let texts: Vec<&str> = out.spans.iter().map(|s| s.text.as_str()).collect();
    assert_eq!(texts, ["vehicle", "heading", "south", "black", "saloon", "license plate"]);
    assert!(matches!(&out.spans[5].element, Element::Property { id } if id.name == "registration"));
    assert_eq!(out.new_instances[0].description, "vehicle");
}

#[test]
fn output_asserts_cleanly() {
    let mut kb = kb_with_v47();
    let out = interpret(&kb, REPORT);
    assert_statements(&mut kb, &out.statements, &model_provenance()).unwrap();
    assert!(kb.is_a("v48", "moving thing"));
    assert!(kb.is_a("v48", "vehicle"));
}

#[test]
fn married_names_become_described_persons() {
    let out = interpret(&moira_kb(), "Fred is married to Jane");
    assert_eq!(
        out.ce(),
        "the person p1 is married to the person p2.\n\
         the person p1 has 'Fred' as description.\n\
         the person p2 has 'Jane' as description."
    );
    assert_eq!(out.score, 1);
    let mut kb = moira_kb();
    assert_statements(&mut kb, &out.statements, &model_provenance()).unwrap();
    assert_eq!(kb.instance("p1").unwrap().description.as_deref(), Some("Fred"));
}

#[test]
fn known_names_are_reused() {
    let mut kb = moira_kb();
    load_document(
        &mut kb,
        "there is a person named Fred. there is a person named Jane.",
        &model_provenance(),
    )
    .unwrap();
    let out = interpret(&kb, "Fred is married to Jane");
    assert_eq!(out.ce(), "the person Fred is married to the person Jane.");
    assert_eq!(out.score, 3);
}

#[test]
fn gibberish_scores_zero() {
    let out = interpret(&moira_kb(), "zzqx wvvt");
    assert_eq!(out.score, 0);
    assert!(out.statements.is_empty());
    assert_eq!(out.unmatched_words.len(), 2);
    assert_eq!(interpret(&moira_kb(), "").score, 0);
}

#[test]
fn colour_named_red_as_nl() {
    let out = interpret(&moira_kb(), "there is a colour named red");
    let kinds: Vec<&Element> = out.spans.iter().map(|s| &s.element).collect();
    assert!(matches!(kinds[0], Element::Concept { name } if name == "colour"));
    assert!(matches!(kinds[1], Element::Instance { id } if id == "red"));
}

#[test]
fn correction_with_truck() {
    let out = interpret(&moira_kb(), "Suspicious vehicle heading south: black truck with license plate DEF456");
    assert!(out.ce().contains("has the vehicle body type truck as body type"), "{}", out.ce());
}

#[test]
fn ids_do_not_repeat_within_an_input() {
    let out = interpret(&moira_kb(), "A car and a bike. Another car.");
    let ids: Vec<&str> = out.new_instances.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(ids, ["v1", "v2", "v3"]);
}

#[test]
fn lookahead_is_configurable() {
    let kb = moira_kb();
    let short = Interpreter::new(1).interpret(&kb, "black saloon with license plate DEF456");
    assert!(short.spans.iter().all(|s| s.len == 1));
    let out = Interpreter::default().interpret(&kb, "black saloon with license plate DEF456");
    assert!(out.spans.iter().any(|s| s.len == 2));
    let _ = render_statements(&out.statements);
}
