//! End-to-end checks of the command-line surface: exit codes, report
//! shapes, and byte determinism.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rootstack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn decompose_chi1_fixture() {
    let path = fixture("chi1_pair.json");
    let out = run(&["decompose", "--input", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["x"], serde_json::json!([1]));
    assert_eq!(v["leaves"][0]["T"], serde_json::json!([1]));
    assert_eq!(v["leaves"][0]["w"], serde_json::json!([1]));
    assert_eq!(v["leaves"][0]["class"], serde_json::json!([1]));
}

#[test]
fn determinism_byte_for_byte() {
    let path = fixture("chi1_pair.json");
    let a = run(&["decompose", "--input", path.to_str().unwrap()]);
    let b = run(&["decompose", "--input", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let ga = run(&["equivariant", "--input", fixture("chi1_graded.json").to_str().unwrap()]);
    let gb = run(&["equivariant", "--input", fixture("chi1_graded.json").to_str().unwrap()]);
    assert_eq!(ga.stdout, gb.stdout);
}

#[test]
fn equivariant_chi1_consistent() {
    let out = run(&[
        "equivariant",
        "--input",
        fixture("chi1_graded.json").to_str().unwrap(),
        "--r",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["consistent"], serde_json::json!(true));
    assert_eq!(v["character"], serde_json::json!([0, 1]));
    assert_eq!(v["intertwiner"], serde_json::json!([[1, 1], [0, 1]]));
}

#[test]
fn validate_valid_and_invalid() {
    let ok = run(&["validate", "--input", fixture("extension_pair_2d.json").to_str().unwrap()]);
    assert!(ok.status.success());
    assert_eq!(stdout_json(&ok)["valid"], serde_json::json!(true));

    let bad = run(&["validate", "--input", fixture("invalid_pair.json").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let v = stdout_json(&bad);
    assert_eq!(v["valid"], serde_json::json!(false));
    assert!(v["failures"].as_array().map_or(false, |f| !f.is_empty()));
}

#[test]
fn decompose_two_divisor_extension() {
    let out = run(&["decompose", "--input", fixture("extension_pair_2d.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["x"], serde_json::json!([1]));
    for leaf in v["leaves"].as_array().unwrap() {
        let class = leaf["class"].as_array().unwrap();
        assert!(class.iter().all(|c| c == &serde_json::json!(0)));
    }
}

#[test]
fn extend_reports_value_and_edges() {
    let out = run(&[
        "extend",
        "--input",
        fixture("chi1_pair.json").to_str().unwrap(),
        "--point",
        "5",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["q"], serde_json::json!([1]));
    assert_eq!(v["twist"], serde_json::json!([2]));
    assert_eq!(v["edges"][0]["twist_delta"], serde_json::json!([1]));
}

#[test]
fn reflection_verdicts() {
    let klein = run(&["reflection", "--input", fixture("klein_group.json").to_str().unwrap()]);
    assert!(klein.status.success());
    let v = stdout_json(&klein);
    assert_eq!(v["order"], serde_json::json!(4));
    assert_eq!(v["verdict"]["kind"], serde_json::json!("Confirmed"));

    let s3 = run(&["reflection", "--input", fixture("s3_group.json").to_str().unwrap()]);
    assert!(s3.status.success());
    let v = stdout_json(&s3);
    assert_eq!(v["order"], serde_json::json!(6));
    assert_eq!(v["verdict"]["kind"], serde_json::json!("NotApplicable"));
    assert_eq!(v["verdict"]["abelian"], serde_json::json!(false));
}

#[test]
fn malformed_input_exits_two() {
    let dir = std::env::temp_dir().join("rootstack-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["decompose", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // schema-valid JSON with an unknown field is also malformed
    let path2 = dir.join("unknown_field.json");
    let mut doc: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("chi1_pair.json")).unwrap())
            .unwrap();
    doc.as_object_mut().unwrap().insert("extra".into(), serde_json::json!(1));
    std::fs::write(&path2, serde_json::to_string(&doc).unwrap()).unwrap();
    let out2 = run(&["decompose", "--input", path2.to_str().unwrap()]);
    assert_eq!(out2.status.code(), Some(2));
}

#[test]
fn selfcheck_passes() {
    let out = run(&["selfcheck", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["ok"], serde_json::json!(true));
    assert!(v["rank_identity_checked"].as_u64().unwrap() > 100);
}

#[test]
fn output_file_roundtrip() {
    let dir = std::env::temp_dir().join("rootstack-cli-out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dec.json");
    let out = run(&[
        "decompose",
        "--input",
        fixture("chi1_pair.json").to_str().unwrap(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], serde_json::json!(1));
}
