use std::process::Command;

use framecat::ctx::Ctx;
use framecat::fib::FOb;
use framecat::frames::{frame_of, unit_1simplex, Adjunction};
use framecat::gpd::Gpd;
use framecat::model::finset_model;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_framecat"))
}

#[test]
fn validate_accepts_a_serialized_diagram() {
    let m = finset_model(2, 2).unwrap();
    let base = Ctx::empty();
    let a = FOb::absolute(&Ctx::from_gpd(&Gpd::discrete(2)));
    let (af, _) = frame_of(m, &base, &a, 1).unwrap();
    let x = unit_1simplex(&Adjunction::Identity, &af, &base).unwrap();
    let dir = std::env::temp_dir();
    let path = dir.join("framecat-cli-diagram.json");
    std::fs::write(&path, serde_json::to_string(&x.diagram).unwrap()).unwrap();
    let out = bin().args(["validate", "diagram"]).arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn validate_rejects_garbage_with_a_parse_exit() {
    let dir = std::env::temp_dir();
    let path = dir.join("framecat-cli-garbage.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = bin().args(["validate", "category"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversize_models_exit_with_the_bound_code() {
    let dir = std::env::temp_dir();
    let path = dir.join("framecat-cli-big.json");
    std::fs::write(
        &path,
        r#"{"kind":"FinSet","bounds":{"size":9,"depth":2,"budget":200000}}"#,
    )
    .unwrap();
    let out = bin().args(["validate", "contextual"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let run = || bin().args(["run", "d", "chain:1", "--width", "2"]).output().unwrap();
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn the_pullback_detector_flags_the_corrupted_square() {
    let out = bin().args(["run", "pullback-check", "corrupt"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["artifact"]["is_homotopy_pullback"], serde_json::json!(false));
}
