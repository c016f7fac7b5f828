mod common;

use moira_core::bundled::moira_kb;
use moira_core::ce::*;
use moira_core::kernel::{Claim, FactPattern, PropertyRange, PropertyStyle, SynonymTarget};

const V48: &str = "there is a vehicle named v48 that
   has DEF456 as registration and
   has the colour black as colour and
   has the vehicle body type saloon as body type and
   is a moving thing.";

fn v48_ast() -> CeStatement {
    CeStatement::new_instance(
        "vehicle",
        "v48",
        vec![
            Clause::has("registration", ClauseValue::literal("DEF456")),
            Clause::has("colour", ClauseValue::instance("colour", "black")),
            Clause::has("body type", ClauseValue::instance("vehicle body type", "saloon")),
            Clause::is_a("moving thing"),
        ],
    )
}

#[test]
fn parses_the_spot_report_listing() {
    assert_eq!(parse_statement(V48).unwrap(), v48_ast());
}

#[test]
fn renders_and_reparses() {
    let text = render_statement(&v48_ast());
    assert_eq!(
        text,
        "there is a vehicle named v48 that has DEF456 as registration and has the colour black as colour \
         and has the vehicle body type saloon as body type and is a moving thing."
    );
    assert_eq!(parse_statement(&text).unwrap(), v48_ast());
}

#[test]
fn known_as_and_is_a() {
    let s = parse_statement("there is a person named p1 that is known as `John Smith' and is a suspect.").unwrap();
    assert_eq!(
        s,
        CeStatement::new_instance(
            "person",
            "p1",
            vec![Clause::KnownAs { label: "John Smith".into() }, Clause::is_a("suspect")]
        )
    );
}

#[test]
fn because_with_mixed_premises() {
    let text = "because there is a person named p1
   that is known as `John Smith' and is a suspect and
   the person p1 has DEF456 as linked vehicle registration and
    there is a vehicle named v48 that has DEF456 as registration.";
    let s = parse_statement(text).unwrap();
    let CeStatement::Because { premises } = &s else { panic!("not a because") };
    assert_eq!(premises.len(), 3);
    assert_eq!(
        premises[1],
        CeStatement::instance_facts(
            "person",
            "p1",
            vec![Clause::has("linked vehicle registration", ClauseValue::literal("DEF456"))]
        )
    );
    assert_eq!(parse_statement(&render_statement(&s)).unwrap(), s);
}

#[test]
fn task_listing_with_verb_clauses() {
    let text = "there is a task named TS_SS_v48 that
   requires the intelligence capability localize and
   is looking for the detectable thing car and
   is seeking instance the vehicle v48 and
   operates in the spatial area `North Road' and
   is ranked with the task priority High.";
    let s = parse_statement(text).unwrap();
    let clauses = s.clauses();
    assert_eq!(clauses.len(), 5);
    assert_eq!(clauses[0], Clause::verb("requires", ClauseValue::instance("intelligence capability", "localize")));
    assert_eq!(clauses[2], Clause::verb("is seeking instance", ClauseValue::instance("vehicle", "v48")));
    assert_eq!(clauses[3], Clause::verb("operates in", ClauseValue::instance("spatial area", "North Road")));
    assert_eq!(parse_statement(&render_statement(&s)).unwrap(), s);
}

#[test]
fn model_declarations() {
    let decls = parse_model(
        "conceptualise a ~ vehicle ~ V.
         conceptualise a ~ helicopter ~ H that is a vehicle.
         there is a direction named south.
         conceptualise a ~ direction ~ D.",
    )
    .unwrap();
    assert_eq!(
        decls[1],
        CeModelDecl::Conceptualise {
            name: "helicopter".into(),
            parents: vec!["vehicle".into()],
            properties: vec![]
        }
    );
    assert_eq!(
        decls[2],
        CeModelDecl::StaticInstance {
            concept: "direction".into(),
            id: "south".into()
        }
    );
    assert!(parse_model("").unwrap().is_empty());
}

#[test]
fn undeclared_reference_is_an_error() {
    let err = parse_model("conceptualise a ~ helicopter ~ H that is a vehicle.").unwrap_err();
    assert!(err.message.contains("vehicle"), "{err}");
}

#[test]
fn synonym_declaration() {
    let decls = parse_model(
        "conceptualise a ~ moving thing ~ M that has the direction D as ~ direction of travel ~.
         conceptualise a ~ direction ~ D.
         the relation concept `moving thing:direction of travel:direction'
           is expressed by the value `driving' and
           is expressed by the value `heading'.",
    )
    .unwrap();
    let CeModelDecl::Conceptualise { properties, .. } = &decls[0] else { panic!() };
    assert_eq!(properties[0].range, PropertyRange::Concept("direction".into()));
    assert_eq!(properties[0].style, PropertyStyle::Has);
    let CeModelDecl::SynonymDecl { target, surfaces } = &decls[2] else { panic!() };
    assert!(matches!(target, SynonymTarget::Property(p) if p.name == "direction of travel"));
    assert_eq!(surfaces, &vec!["driving".to_string(), "heading".to_string()]);
}

#[test]
fn model_decls_round_trip() {
    let kb = moira_kb();
    for d in describe_model(kb.model()) {
        let text = render_model_decl(&d);
        let back = CeParser::new().parse_document(&text).unwrap();
        assert_eq!(back.len(), 1, "{text}");
        assert_eq!(back[0].item, CeSentence::Model(d), "{text}");
    }
}

#[test]
fn errors_carry_locations() {
    let err = parse_statement("there is a vehicle named v48 that\n  has DEF456 registration.").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(err.message.contains("'as'"), "{err}");
    let err = parse_statement("there is a vehicle named v48").unwrap_err();
    assert!(err.message.contains("period"));
}

#[test]
fn bundled_model_loads_and_answers_lookups() {
    let kb = moira_kb();
    let car = kb.lookup_surface(&["car"]);
    assert!(car.iter().any(|e| matches!(&e.element, moira_core::kernel::Element::Concept { name } if name == "vehicle")));
    let heading = kb.lookup_surface(&["heading"]);
    assert!(heading.iter().any(|e| matches!(&e.element,
        moira_core::kernel::Element::Property { id } if id.to_string() == "moving thing:direction of travel:direction")));
    assert!(kb.lookup_surface(&["police", "constable"]).is_empty());
}

#[test]
fn asserting_the_listing_upserts_one_instance() {
    let mut kb = moira_kb();
    let text = format!("{V48}\nthere is a moving thing named v48 that has the direction south as direction of travel.");
    let summary = load_document(&mut kb, &text, &moira_core::bundled::model_provenance()).unwrap();
    assert_eq!(summary.instances, vec!["v48".to_string()]);
    assert!(kb.is_a("v48", "moving thing"));
    let found = kb.query(&FactPattern::any().property("registration").object("DEF456"));
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].subject, "v48");
    let described = describe_instance(&kb, "v48").unwrap();
    assert_eq!(described.clauses().len(), 5);
    assert!(described.clauses().contains(&Clause::is_a("moving thing")));
    assert!(kb.facts().iter().any(|f| matches!(&f.claim, Claim::IsA { concept } if concept == "moving thing")));
}

#[test]
fn failed_load_leaves_kb_untouched() {
    let mut kb = moira_kb();
    let before = kb.clone();
    let err = load_document(
        &mut kb,
        "there is a vehicle named v9 that has X1 as registration.\nthe colour black has X as registration.",
        &moira_core::bundled::model_provenance(),
    )
    .unwrap_err();
    assert!(matches!(err, LoadError::Model { line: 2, .. }), "{err}");
    assert_eq!(kb, before);
}

mod round_trip {
    use super::*;
    use proptest::prelude::*;

    use crate::common::ast::statement;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn parse_inverts_render(stmt in statement()) {
            let text = render_statement(&stmt);
            let back = parse_statement(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
            prop_assert_eq!(back, stmt, "{}", text);
        }

        #[test]
        fn documents_inverts_render(stmts in prop::collection::vec(statement(), 0..6)) {
            let text = render_statements(&stmts);
            prop_assert_eq!(parse_statements(&text).unwrap(), stmts);
        }
    }
}
