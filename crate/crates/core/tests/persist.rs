mod common;

use proptest::prelude::*;

use common::gen::generated;
use common::{at, scenario_hub, REPORT};
use moira_core::bundled::moira_kb;
use moira_core::ce::load_document;
use moira_core::gist::Device;
use moira_core::hub::Post;
use moira_core::kernel::{KnowledgeBase, Provenance};
use moira_core::persist::{load, load_from, save, save_to, PersistError};
use moira_core::protocol::{Body, MessageKind};

#[test]
fn bundled_model_round_trips() {
    let kb = moira_kb();
    assert_eq!(load(&save(&kb)).unwrap(), kb);
}

#[test]
fn a_working_hub_kb_round_trips() {
    let mut hub = scenario_hub();
    let s = hub.join("PC Jones", "patrol", Device::Phone, Some("North Road")).unwrap().id;
    let out = hub.post(&s, Post::new(MessageKind::NlInput, Body::text(REPORT)), at(0)).unwrap();
    let accept = Post::new(MessageKind::ConfirmAccept, Body::Empty)
        .in_conversation(&out[0].conversation)
        .replying_to(&out[1].id);
    hub.post(&s, accept, at(1)).unwrap();
    let kb = hub.kb();
    assert!(kb.facts().iter().any(|f| f.provenance.is_inferred()));
    assert!(kb.facts().iter().any(|f| matches!(&f.provenance, Provenance::Told { conversation: Some(_), .. })));
    let text = save(kb);
    assert_eq!(&load(&text).unwrap(), kb);
    assert!(text.contains("-- @fact"));
    assert!(text.contains("the vehicle v48 has DEF456 as registration."));
}

#[test]
fn saved_text_is_plain_ce() {
    // Any CE reader can load the file; it just loses the provenance.
    let kb = generated(7);
    let mut plain = KnowledgeBase::new();
    load_document(&mut plain, &save(&kb), &moira_core::bundled::model_provenance()).unwrap();
    assert_eq!(plain.instances().count(), kb.instances().count());
    assert_eq!(plain.model(), kb.model());
}

#[test]
fn errors_name_the_line() {
    let text = save(&moira_kb());
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let target = lines.iter().position(|l| l.starts_with("there is")).unwrap();
    lines[target] = "there is a spaceship named x1.".into();
    let err = load(&lines.join("\n")).unwrap_err();
    // The annotation sits on the line above the statement.
    assert!(matches!(err, PersistError::Model { line, .. } | PersistError::Syntax { line, .. } if line == target || line == target + 1), "{err}");

    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let ann = lines.iter().position(|l| l.starts_with("-- @instance")).unwrap();
    lines[ann] = "-- @instance {not json".into();
    let err = load(&lines.join("\n")).unwrap_err();
    assert!(matches!(err, PersistError::Syntax { line, .. } if line == ann + 1), "{err}");

    let err = load("-- model\nconceptualise a ~ thing ~ T\n").unwrap_err();
    assert!(matches!(err, PersistError::Syntax { line: 2, .. }), "{err}");
}

#[test]
fn files_round_trip() {
    let kb = generated(11);
    let dir = std::env::temp_dir().join(format!("moira-persist-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("kb.ce");
    save_to(&kb, &path).unwrap();
    assert_eq!(load_from(&path).unwrap(), kb);
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(matches!(load_from(&path), Err(PersistError::Io(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn generated_kbs_round_trip(seed in any::<u64>()) {
        let kb = generated(seed);
        let text = save(&kb);
        let back = load(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, kb);
    }
}
