use ttdef_core::corpus;
use ttdef_core::equivalence::bounded_equivalence;
use ttdef_core::model::{parse_spec, Decl, LookAround, PairedSpec, TdttSpec};
use ttdef_core::pipeline::*;

fn att(name: &str) -> Decl {
    Decl::Att(corpus::att(name))
}

#[test]
fn config_parsing() {
    let c = BudgetConfig::parse("# budgets\nequivalence_depth = 3\n\nmax_steps=10 # inline\n").unwrap();
    assert_eq!(c.equivalence_depth, 3);
    assert_eq!(c.max_steps, 10);
    assert_eq!(c.verify_word_length, 10);
    assert!(matches!(BudgetConfig::parse("depth = 3"), Err(ConfigError::UnknownKey(1, _))));
    assert!(matches!(BudgetConfig::parse("max_steps = 0"), Err(ConfigError::BadValue(1, _))));
    assert!(matches!(BudgetConfig::parse("\nmax_steps"), Err(ConfigError::Syntax(2))));
}

#[test]
fn a1_fails_single_path() {
    let r = decide_dtr(&att("a1"), &BudgetConfig::default()).unwrap();
    let Answer::No { reason, witness } = &r.answer else { panic!("{:?}", r.answer) };
    assert_eq!(reason, "single-path-fails");
    let w: serde_json::Value = serde_json::from_str(&r.artifact(witness).unwrap().content).unwrap();
    assert!(w["input"].is_string());
    assert_eq!(r.stages.last().unwrap().stage, "single_path");
    assert_eq!(r.exit_code(), 0);
}

#[test]
fn a2_is_decided_yes_and_certified() {
    let input = att("a2");
    let r = decide_dtr(&input, &BudgetConfig::default()).unwrap();
    let Answer::Yes { spec } = &r.answer else { panic!("{:?}", r.answer) };
    let text = &r.artifact(spec).unwrap().content;
    let back = parse_spec(text).unwrap();
    assert!(matches!(back, Decl::Pair(PairedSpec::DtR { .. })));
    assert!(bounded_equivalence(&input, &back, 4).is_equal());
    let names: Vec<&str> = r.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(
        names,
        [
            "validate",
            "check_monadic",
            "is_circular",
            "normalize_ground_rhs",
            "single_path",
            "associate",
            "build_two_way",
            "one_way_definability",
            "back_convert",
            "uniformize",
            "bounded_equivalence"
        ]
    );
}

#[test]
fn reports_are_reproducible() {
    let a = decide_dtr(&att("a2"), &BudgetConfig::default()).unwrap();
    let b = decide_dtr(&att("a2"), &BudgetConfig::default()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.hash.len(), 64);
    let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(v["schema"], 1);
    for art in &a.artifacts {
        assert!(art.name.contains('-'));
    }
}

#[test]
fn look_around_input_is_composed() {
    let a2 = corpus::att("a2");
    let id = TdttSpec::identity("Id", &a2.input);
    let b = ttdef_core::model::RelabelingSpec::identity("B", &a2.input);
    let u = LookAround { name: "U".into(), b, l: id };
    let input = Decl::Pair(PairedSpec::AttU { name: "A2U".into(), u, a: a2 });
    let r = decide_dtr(&input, &BudgetConfig::default()).unwrap();
    let Answer::Yes { spec } = &r.answer else { panic!("{:?}", r.answer) };
    assert!(r.stages.iter().any(|s| s.stage == "compose_dtR"));
    let back = parse_spec(&r.artifact(spec).unwrap().content).unwrap();
    assert!(bounded_equivalence(&input, &back, 4).is_equal());
}

#[test]
fn nondeterministic_inputs() {
    let r = decide_dtr(&att("n1"), &BudgetConfig::default()).unwrap();
    assert!(matches!(&r.answer, Answer::No { reason, .. } if reason == "not-functional"), "{:?}", r.answer);
    let r = decide_dtr(&att("c0"), &BudgetConfig::default()).unwrap();
    assert!(matches!(&r.answer, Answer::Unknown { .. }), "{:?}", r.answer);
    assert_eq!(r.exit_code(), 2);
}

#[test]
fn nonmonadic_output_is_an_error() {
    let mut a = corpus::att("a2");
    a.output.insert(ttdef_core::trees::Symbol::new("h"), 2).unwrap();
    let e = decide_dtr(&Decl::Att(a), &BudgetConfig::default()).unwrap_err();
    assert_eq!(e.stage, "check_monadic");
}

#[test]
fn persisted_artifacts_reload() {
    let dir = std::env::temp_dir().join(format!("ttdef-pipeline-{}", std::process::id()));
    let r = decide_dtr(&att("a2"), &BudgetConfig::default()).unwrap();
    r.persist(&dir).unwrap();
    let Answer::Yes { spec } = &r.answer else { panic!() };
    let text = std::fs::read_to_string(dir.join(spec)).unwrap();
    let back = parse_spec(&text).unwrap();
    assert!(bounded_equivalence(&att("a2"), &back, 4).is_equal());
    assert!(dir.join("report.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}
