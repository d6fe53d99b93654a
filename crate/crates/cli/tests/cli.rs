use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn fan(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fans");
    root.join(format!("{name}.json")).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbimirror")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn open_gw_reports_quarter_at_l3() {
    let out = run(&["open-gw", &fan("p112"), "--order", "12", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let hit = v["entries"].as_array().unwrap().iter().any(|e| e["l"] == serde_json::json!([3]) && e["value"] == "-1/4");
    assert!(hit, "{v}");
}

#[test]
fn csv_open_gw_has_header() {
    let out = run(&["open-gw", &fan("p112"), "--order", "6", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("term,class,l,value\n"));
    assert!(s.contains("3,0,3,-1/4"));
}

#[test]
fn smooth_plane_has_empty_box() {
    let out = run(&["box", &fan("p2"), "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out), serde_json::json!([]));
}

#[test]
fn labels_multiply_rays() {
    let a = run(&["box", &fan("p1_35"), "--format", "json"]);
    let b = run(&["box", &fan("p1_35_labels"), "--format", "json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(json(&a).as_array().unwrap().len(), 6);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_reports_fano_p112() {
    let v = json(&run(&["check", &fan("p112"), "--format", "json"]));
    assert_eq!(v["gorenstein"], true);
    assert_eq!(v["fano"], true);
    assert_eq!(v["c1_multiset"], serde_json::json!(["2", "2", "4"]));
}

#[test]
fn crc_p112_passes() {
    let out = run(&[
        "crc", &fan("p112"), "--resolution", &fan("f2"), "--wpn", "2", "--order", "12", "--tol", "1e-10", "--format", "json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["status"], "pass");
}

#[test]
fn specialize_p112_passes() {
    let out = run(&["specialize", &fan("p112"), "--resolution", &fan("f2"), "--order", "12", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["q1_at_zero"], "-1");
    assert_eq!(v["status"], "pass");
}

#[test]
fn non_crepant_pair_exits_2() {
    let out = run(&["crc", &fan("p1xp1"), "--resolution", &fan("blowup")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wrong_wpn_is_input_error() {
    let out = run(&["crc", &fan("p112"), "--resolution", &fan("f2"), "--wpn", "3"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_family_notes_missing_continuation() {
    let out = run(&["crc", &fan("p2"), "--resolution", &fan("p2"), "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["note"], "continuation not implemented for this family");
}

#[test]
fn xbar_cross_check_agrees() {
    let out = run(&["xbar", &fan("p112"), "--order", "8", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["check"]["agree"], true);
}

#[test]
fn json_output_is_deterministic() {
    for cmd in ["keff", "mirror-map", "superpotential", "open-gw"] {
        let a = run(&[cmd, &fan("p112"), "--order", "8", "--format", "json"]);
        let b = run(&[cmd, &fan("p112"), "--order", "8", "--format", "json"]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["keff", &fan("p1113"), "--order", "6", "--format", "json"];
    let one = Command::new(env!("CARGO_BIN_EXE_orbimirror")).args(args).env("ORBIMIRROR_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_orbimirror")).args(args).env("ORBIMIRROR_THREADS", "4").output().unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let out = run(&["superpotential", &fan("p112"), "--order", "4", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["validate", "/nonexistent/fan.json"])), 1);
    assert_eq!(code(&run(&["bogus"])), 1);
    assert_eq!(code(&run(&["open-gw", &fan("p112"), "--order", "0"])), 1);
    assert_eq!(code(&run(&["open-gw", &fan("p112"), "--gauge", "0,7"])), 1);
    assert_eq!(code(&run(&["mirror-map", &fan("p112"), "--format", "csv"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn incomplete_fan_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half.json");
    std::fs::write(&path, r#"{"dim":2,"stacky_vectors":[[1,0],[0,1]],"max_cones":[[0,1]]}"#).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&run(&["validate", p])), 2);
    assert_eq!(code(&run(&["box", p])), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_input_exits_1(text in "\\PC{0,60}") {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, &text).unwrap();
        let out = run(&["box", path.to_str().unwrap()]);
        prop_assert_eq!(code(&out), 1);
    }

    #[test]
    fn malformed_vectors_exit_1(d in 1usize..4, v in prop::collection::vec(prop::collection::vec(-3i64..4, 0..5), 0..5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let body = serde_json::json!({"dim": d, "stacky_vectors": v, "max_cones": [[0, 9]]});
        std::fs::write(&path, body.to_string()).unwrap();
        let out = run(&["check", path.to_str().unwrap()]);
        prop_assert_eq!(code(&out), 1);
    }
}
