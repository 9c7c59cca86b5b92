use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::Deserialize;

use lacheck::eval::EvalMode;
use lacheck::examples::EXAMPLES;
use lacheck::model::Model;
use lacheck::report::{Report, Status};
use lacheck::runner::{run, RunOptions, Suite, REGISTRY};

#[derive(Deserialize)]
struct Expected {
    exit_code: i32,
    verdicts: BTreeMap<String, String>,
    checks: BTreeMap<String, Status>,
}

fn expected(name: &str) -> Expected {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/expected").join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn report(src: &str, mode: EvalMode) -> Report {
    let model = Model::from_json(src).unwrap();
    run(&model, &RunOptions { mode, ..RunOptions::default() }).unwrap()
}

#[test]
fn fixtures_match_expected_outcomes() {
    for (name, src) in EXAMPLES {
        let exp = expected(name);
        let r = report(src, EvalMode::default());
        let got: BTreeMap<String, Status> = r.checks.iter().map(|c| (c.name.clone(), c.status)).collect();
        assert_eq!(got, exp.checks, "{name}");
        assert_eq!(r.verdicts, exp.verdicts, "{name}");
        assert_eq!(r.exit_code(), exp.exit_code, "{name}");
    }
}

#[test]
fn every_registered_check_is_exercised() {
    let exercised: BTreeSet<String> = EXAMPLES
        .iter()
        .flat_map(|(name, _)| expected(name).checks)
        .filter(|(_, s)| *s != Status::Skipped)
        .map(|(n, _)| n)
        .collect();
    let registered: BTreeSet<String> = REGISTRY.iter().map(|s| s.name.to_string()).collect();
    let unexercised: Vec<_> = registered.difference(&exercised).collect();
    let unknown: Vec<_> = exercised.difference(&registered).collect();
    assert!(unexercised.is_empty(), "never exercised: {unexercised:?}");
    assert!(unknown.is_empty(), "not registered: {unknown:?}");
}

#[test]
fn reports_are_byte_identical_across_runs_and_modes() {
    for (name, src) in EXAMPLES {
        let a = report(src, EvalMode::Parallel).to_json();
        let b = report(src, EvalMode::Parallel).to_json();
        let c = report(src, EvalMode::Sequential).to_json();
        assert_eq!(a, b, "{name}");
        assert_eq!(a, c, "{name}");
    }
}

#[test]
fn seed_changes_points() {
    let src = EXAMPLES[0].1;
    let model = Model::from_json(src).unwrap();
    let a = run(&model, &RunOptions { seed: Some(1), ..RunOptions::default() }).unwrap();
    let b = run(&model, &RunOptions { seed: Some(2), ..RunOptions::default() }).unwrap();
    assert_ne!(a.to_json(), b.to_json());
}

#[test]
fn missing_block_names_the_field() {
    let src = lacheck::examples::source("broken_jacobi").unwrap();
    let model = Model::from_json(src).unwrap();
    let err = run(&model, &RunOptions { suites: vec![Suite::Multisym], ..RunOptions::default() }).unwrap_err();
    assert!(err.to_string().contains("multisym"), "{err}");
}

#[test]
fn require_h1_makes_h1_blocking() {
    let src = lacheck::examples::source("rotation_momentum_map").unwrap();
    let model = Model::from_json(src).unwrap();
    let r = run(&model, &RunOptions { require_h1: true, ..RunOptions::default() }).unwrap();
    for n in ["H1", "HM1", "mech_H1", "sigma_H1"] {
        assert!(!r.check(n).unwrap().informational, "{n}");
    }
    assert!(r.check("closedness_B").unwrap().informational);
}

#[test]
fn report_schema_lists_every_field() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../docs/report.schema.json")).unwrap();
    let keys = |v: &serde_json::Value| -> BTreeSet<String> { v.as_object().unwrap().keys().cloned().collect() };
    let required = |v: &serde_json::Value| -> BTreeSet<String> {
        v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
    };
    let r: serde_json::Value = serde_json::from_str(&report(EXAMPLES[0].1, EvalMode::Sequential).to_json()).unwrap();
    assert_eq!(keys(&r), required(&schema["required"]));
    assert_eq!(keys(&r["checks"][0]), required(&schema["properties"]["checks"]["items"]["required"]));
}
