use std::process::{Command, Output};

use serde_json::Value;

fn moulds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moulds")).args(args).env("MOULDS_WORKERS", "2").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(moulds(&["run", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(moulds(&["run", "--max-length", "7"]).status.code(), Some(2));
    assert_eq!(moulds(&["run", "--gamma", "z9"]).status.code(), Some(2));
    assert_eq!(moulds(&["grt-solve", "--degree", "5"]).status.code(), Some(2));
    assert_eq!(moulds(&["grt-solve", "--degree", "7", "--cap", "9"]).status.code(), Some(2));
    assert_eq!(moulds(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn paj_suite_passes_at_length_four() {
    let out = moulds(&["run", "--suite", "paj", "--suite", "mould", "--max-length", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "moulds-report/1");
    assert_eq!(r["summary"]["fail"], 0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["suite"] == "paj" || c["suite"] == "mould"));
}

#[test]
fn reports_are_deterministic() {
    let args = ["run", "--max-length", "3", "--max-degree", "4", "--seed", "7", "--format", "json"];
    let a = moulds(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_moulds")).args(args).env("MOULDS_WORKERS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn skipped_checks_carry_a_reason() {
    let r = json(&moulds(&["run", "--suite", "appendix-c", "--gamma", "z2", "--max-length", "2", "--format", "json"]));
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "skipped");
        assert!(c["reason"].is_string());
    }
}

#[test]
fn export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (object, kind) in [("paj", "mould"), ("pic", "mould"), ("grt-phi", "series")] {
        let file = dir.path().join(format!("{object}.json"));
        let out = moulds(&["export", object, "--max-length", "3", "--max-degree", "4", "--out", file.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let exported: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        let imported = moulds(&["import", file.to_str().unwrap(), "--strict"]);
        assert_eq!(imported.status.code(), Some(0), "{}", String::from_utf8_lossy(&imported.stderr));
        let v = json(&imported);
        assert_eq!(v["kind"], kind);
        assert_eq!(v["value"], exported);
    }
}

fn import_str(text: &str, strict: bool) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("in.json");
    std::fs::write(&file, text).unwrap();
    let mut args = vec!["import", file.to_str().unwrap()];
    if strict {
        args.push("--strict");
    }
    moulds(&args)
}

#[test]
fn unreduced_rationals_need_lenient_mode() {
    let series = r#"{"gamma":"trivial","max_degree":2,"terms":[{"word":[],"coeff":"2/4"}]}"#;
    assert_eq!(import_str(series, true).status.code(), Some(2));
    let out = import_str(series, false);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["value"]["terms"][0]["coeff"], "1/2");
}

#[test]
fn polynomial_moulds_reject_denominators() {
    let m = r#"{"family":"pol","gamma":"trivial","max_length":1,"components":[
        {"labels":["1"],"length":1,"value":{"den":[[[1],1]],"num":[["1/1",[0]]]}}]}"#;
    assert_eq!(import_str(m, false).status.code(), Some(2));
    assert_eq!(import_str("[1, 2", false).status.code(), Some(2));
}

#[test]
fn grt_solve_finds_the_degree_three_solution() {
    let out = moulds(&["grt-solve", "--degree", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let graded = r["data"]["graded"].as_array().unwrap();
    let dims: Vec<u64> = graded.iter().map(|g| g["dimension"].as_u64().unwrap()).collect();
    assert_eq!(dims, [0, 1, 1]);
    assert!(!graded[2]["representative"].is_null());
    assert!(r["summary"]["pass"].as_u64().unwrap() > 0);

    let trivial = json(&moulds(&["grt-solve", "--degree", "0", "--format", "json"]));
    assert_eq!(trivial["data"]["graded"], Value::Array(vec![]));
}
