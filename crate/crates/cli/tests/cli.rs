use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn udk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udk"))
        .args(args)
        .output()
        .expect("run udk")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("udk-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn haar_dim2_t5() {
    let out = udk(&["haar", "--dim", "2", "--t", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "42");
    let v = json(&udk(&["--json", "haar", "--dim", "3", "--t", "3"]));
    assert_eq!(v["moment"], "6");
}

#[test]
fn haar_monte_carlo_is_reported() {
    let v = json(&udk(&["--json", "haar", "--dim", "2", "--t", "2", "--mc", "20000", "--seed", "3"]));
    assert_eq!(v["moment"], "2");
    let mean = v["monte_carlo"]["mean"].as_f64().expect("mean");
    assert!((mean - 2.0).abs() < 0.2, "{v}");
}

#[test]
fn certify_binary_icosahedral() {
    let out = udk(&["--json", "certify", "--group", &data("sl2_5_dim2.json"), "--tmax", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["max_t"], 5);
    assert_eq!(v["order"], "120");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[5]["moment"], "133");
    assert_eq!(rows[5]["haar"], "132");
    assert_eq!(rows[5]["equal"], false);
}

#[test]
fn moment_of_clifford_1() {
    let out = udk(&["moment", "--group", &data("clifford_1.json"), "--t", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("15"));
}

#[test]
fn missing_file_is_input_error() {
    let out = udk(&["certify", "--group", "/nonexistent/group.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn json_error_shape() {
    let out = udk(&["--json", "moment", "--group", "/nonexistent/group.json", "--t", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    let e = &v["error"];
    assert_eq!(e["kind"], "input");
    assert_eq!(e["exit_code"], 2);
    assert!(e["message"].as_str().unwrap().contains("group.json"));
}

#[test]
fn malformed_entry_is_input_error() {
    let path = scratch("bad.json");
    std::fs::write(
        &path,
        r#"{"name":"bad","dimension":1,"conductor":4,"generators":[[["E(4)^^2"]]]}"#,
    )
    .unwrap();
    let out = udk(&["--json", "certify", "--group", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["exit_code"], 2);
}

#[test]
fn cap_exceeded_exit_code() {
    let out = udk(&["--json", "certify", "--group", &data("clifford_2.json"), "--cap", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"]["exit_code"], 3);
}

#[test]
fn catalog_list_names_every_entry() {
    let v = json(&udk(&["--json", "catalog", "list"]));
    let names: Vec<&str> = v
        .as_array()
        .or_else(|| v["entries"].as_array())
        .expect("entry list")
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    for n in ["q8", "sl2_5_dim2", "clifford_2", "two_a7_dim4", "six_a7_dim6"] {
        assert!(names.contains(&n), "{n} missing from {names:?}");
    }
}

#[test]
fn catalog_emit_round_trip() {
    let path = scratch("sl2_3.json");
    let out = udk(&["catalog", "emit", "sl2_3_dim2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&udk(&["--json", "certify", "--group", path.to_str().unwrap(), "--tmax", "3"]));
    assert_eq!(v["order"], "24");
    assert_eq!(v["max_t"], 2);
}

#[test]
fn catalog_verify_curated_entry() {
    let out = udk(&["catalog", "verify", "valentiner_3a6_dim3"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn catalog_unknown_name() {
    let out = udk(&["catalog", "verify", "no_such_group"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn orbits_of_a_witness() {
    let v = json(&udk(&["--json", "orbits", "--group", &data("witnesses/sl2_13_in_sp6_3.json")]));
    assert_eq!(v["orbits"], serde_json::json!([728]));
    assert_eq!(v["transitive"], true);
}

#[test]
fn search_transitive_p5() {
    let v = json(&udk(&["--json", "search-transitive", "--p", "5"]));
    let mut orders: Vec<u64> = v["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["fingerprint"]["order"].as_u64().unwrap())
        .collect();
    orders.sort();
    assert_eq!(orders, vec![24, 120]);
}

#[test]
fn search_transitive_rejects_composite() {
    let out = udk(&["search-transitive", "--p", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_dim2_section() {
    let out = udk(&["--json", "reproduce", "--section", "dim2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["rows"].as_array().expect("rows");
    assert!(rows.iter().any(|r| r["status"] == "note"));
    assert!(rows.iter().all(|r| r["status"] != "fail"));
}

#[test]
fn json_reports_match_the_schema() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report-schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("valid schema");
    assert!(!validator.is_valid(&serde_json::json!({ "dim": 2, "t": 3, "moment": 6 })));
    assert!(!validator.is_valid(&serde_json::json!({ "error": { "kind": "input", "message": "x" } })));
    let emitted = scratch("emitted.json");
    let runs: Vec<Vec<String>> = vec![
        vec!["haar".into(), "--dim".into(), "2".into(), "--t".into(), "3".into()],
        vec!["haar".into(), "--dim".into(), "2".into(), "--t".into(), "3".into(), "--mc".into(), "1000".into()],
        vec!["moment".into(), "--group".into(), data("q8.json"), "--t".into(), "2".into()],
        vec!["certify".into(), "--group".into(), data("clifford_1.json"), "--mc".into(), "1000".into()],
        vec!["catalog".into(), "list".into()],
        vec!["catalog".into(), "verify".into(), "--all".into(), "--cap".into(), "250000".into()],
        vec!["catalog".into(), "emit".into(), "q8".into(), "--out".into(), emitted.to_string_lossy().into_owned()],
        vec!["orbits".into(), "--group".into(), data("witnesses/sl2_8_in_sp6_2.json")],
        vec!["search-transitive".into(), "--p".into(), "3".into()],
        vec!["witness".into(), "two_s5_in_sp4_3".into()],
        vec!["reproduce".into(), "--section".into(), "dim3".into()],
        vec!["moment".into(), "--group".into(), "/nonexistent.json".into(), "--t".into(), "1".into()],
        vec!["certify".into(), "--group".into(), data("clifford_2.json"), "--cap".into(), "100".into()],
    ];
    for args in runs {
        let mut full = vec!["--json"];
        full.extend(args.iter().map(String::as_str));
        let v = json(&udk(&full));
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}\n{v}");
    }
}
