use courant_core::builders;
use courant_core::courant::TestConfig;
use courant_core::error::{Error, ParseClass};
use courant_core::fixtures::{self, FIXTURES};
use courant_core::model::{parse_model, render_model};
use courant_core::suite;

fn diagnostic(src: &str) -> (ParseClass, usize, usize, String) {
    match parse_model(src).unwrap_err() {
        Error::Parse { class, line, column, message } => (class, line, column, message),
        e => panic!("expected a diagnostic, got {e:?}"),
    }
}

#[test]
fn shipped_fixtures_round_trip() {
    for (name, src) in FIXTURES {
        let m = parse_model(src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = render_model(&m);
        let again = parse_model(&text).unwrap();
        assert_eq!(m, again, "{name}");
        assert_eq!(render_model(&again), text, "{name}");
        assert_eq!(&text, src, "{name} is not in canonical form");
    }
}

#[test]
fn standard_r1_is_the_builder() {
    let m = parse_model(fixtures::get("examples/standard_r1").unwrap()).unwrap();
    let b = builders::standard_courant(1);
    assert_eq!(m.datum.names(), b.names());
    assert_eq!(m.datum.anchors(), b.anchors());
    assert_eq!(m.datum.structure(), b.structure());
    for (x, y) in m.datum.pairing().matrix().iter().zip(b.pairing().matrix()) {
        assert_eq!(x, y);
    }
}

#[test]
fn wrong_inverse_is_a_pairing_witness() {
    let (class, line, column, msg) = diagnostic(include_str!("fixtures/wrong_inverse.toml"));
    assert_eq!(class, ParseClass::PairingWitness);
    assert_eq!((line, column), (18, 11));
    assert_eq!(msg, "eta * eta_inv has entry (2,2) = 2");
}

#[test]
fn undeclared_generator_is_unresolved() {
    let (class, line, column, msg) = diagnostic(include_str!("fixtures/undeclared_generator.toml"));
    assert_eq!(class, ParseClass::UnresolvedReference);
    // the `s` inside "2*s"
    assert_eq!((line, column), (38, 19));
    assert!(msg.contains('s'), "{msg}");
}

#[test]
fn diagnostic_classes_are_distinct() {
    let base = fixtures::get("so3_point").unwrap();
    let syntax = base.replace("[module]", "[module");
    assert_eq!(diagnostic(&syntax).0, ParseClass::Syntax);
    let schema = base.replace("[module]", "[module]\ncolour = 3");
    let (class, line, _, _) = diagnostic(&schema);
    assert_eq!((class, line), (ParseClass::Schema, 10));
    let bad_poly = base.replace("value = { e1 = \"1\" }", "value = { e1 = \"1 +* 2\" }");
    assert_eq!(diagnostic(&bad_poly).0, ParseClass::Syntax);
    let bad_pair = base.replace("pair = [\"e2\", \"e3\"]", "pair = [\"e2\", \"e7\"]");
    let (class, _, _, msg) = diagnostic(&bad_pair);
    assert_eq!(class, ParseClass::UnresolvedReference);
    assert!(msg.contains("e7"));
    let version = base.replace("courant-model/1", "courant-model/9");
    assert_eq!(diagnostic(&version).0, ParseClass::Schema);
    let asym = base.replacen("[\"1\", \"0\", \"0\"]", "[\"1\", \"1\", \"0\"]", 1);
    assert_eq!(diagnostic(&asym).0, ParseClass::Schema);
}

#[test]
fn fixtures_meet_their_expectations() {
    let cfg = TestConfig { random_sections: 3, ..TestConfig::default() };
    for (name, src) in FIXTURES {
        let m = parse_model(src).unwrap();
        for s in &m.suites {
            let t = std::time::Instant::now();
            let r = match s.as_str() {
                "check-courant" => suite::check_courant(&m, name, &cfg),
                "rw-check" => suite::rw_check(&m, name, &cfg).unwrap(),
                "cme" => suite::cme(&m, name, 2).unwrap(),
                "extend" => suite::extend(&m, name, &cfg).unwrap(),
                "reduce" => suite::reduce(&m, name, 2, &cfg).unwrap(),
                other => panic!("{other}"),
            };
            eprintln!("{name} {s} {:?}", t.elapsed());
            assert_eq!(r.pass, m.expect_pass, "{name} {s}:\n{}", r.to_text(None));
        }
    }
}
