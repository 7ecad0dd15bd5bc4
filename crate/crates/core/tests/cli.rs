use std::process::Command;

use serde_json::{json, Value};

fn lslopes(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lslopes"))
        .args(args)
        .env_remove("LSLOPES_CACHE_DIR")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn without_volatile(mut v: Value) -> Value {
    let o = v.as_object_mut().unwrap();
    o.remove("timing_ms");
    o.remove("cache");
    v
}

#[test]
fn verify_json_schema() {
    let (code, out, _) = lslopes(&["--p", "5", "--d", "3", "--no-cache", "--threads", "1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["input"], json!({"p": 5, "d": 3, "h": 1, "M": 1, "a": [1], "modulus": [0, 1], "route": "verify", "max_m": null}));
    let slopes = json!([[0, 1], [1, 2], [1, 2]]);
    assert_eq!(v["predicted_slopes"], slopes);
    assert_eq!(v["bruteforce"]["slopes"], slopes);
    assert_eq!(v["dwork"]["slopes"], slopes);
    assert_eq!(v["bruteforce"]["coeff_valuations"][1], json!([1, [0, 1]]));
    assert_eq!(v["dwork"]["minor_valuations"], json!([[0, 1], [1, 2], [1, 1]]));
    assert_eq!(v["dwork"]["fredholm_valuations"][1], json!({"exact": [1, 2]}));
    assert_eq!(v["dwork"]["zhu"][1]["upper"], json!([1, 2]));
    assert_eq!(v["verdict"], "match");
    assert!(v["hypotheses"].as_array().unwrap().iter().all(|h| h["pass"] == true));
}

#[test]
fn exit_codes() {
    let (code, _, err) = lslopes(&["--p", "4", "--d", "3", "--no-cache"]);
    assert_eq!(code, 2);
    assert!(err.contains("not prime"));
    let (code, out, _) = lslopes(&["--p", "7", "--d", "3", "--route", "predict", "--no-cache"]);
    assert_eq!(code, 2);
    assert!(out.contains("hypothesis-failed"));
    let (code, _, err) = lslopes(&["--p", "5", "--d", "3", "--h", "2", "--a", "1", "--no-cache"]);
    assert_eq!(code, 2);
    assert!(err.contains("coordinate"));
    let (code, out, _) = lslopes(&["--p", "5", "--d", "3", "--chi-level", "2", "--route", "lfun", "--max-m", "3", "--no-cache"]);
    assert_eq!(code, 0);
    assert!(out.contains("prefix-match"));
}

#[test]
fn csv_and_table() {
    let (_, out, _) = lslopes(&["--p", "7", "--d", "4", "--route", "lfun", "--format", "csv", "--no-cache"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "route,index,num,den");
    assert!(lines.contains(&"lfun,1,1,3"));
    assert!(lines.contains(&"predict,3,2,3"));
    let (_, out, _) = lslopes(&["--p", "7", "--d", "4", "--route", "predict", "--format", "table", "--no-cache"]);
    assert!(out.contains("0.333333"));
    assert!(out.contains("verdict: match"));
}

#[test]
fn reports_are_deterministic_and_cache_is_sound() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["--p", "5", "--d", "3", "--h", "2", "--a", "0,1", "--cache-dir", cache, "--threads", "2"];
    let (_, cold, _) = lslopes(&args);
    let (_, warm, _) = lslopes(&args);
    let (_, none, _) = lslopes(&["--p", "5", "--d", "3", "--h", "2", "--a", "0,1", "--no-cache"]);
    let cold: Value = serde_json::from_str(&cold).unwrap();
    let warm: Value = serde_json::from_str(&warm).unwrap();
    assert_eq!(cold["cache"]["misses"], 3);
    assert_eq!(warm["cache"]["hits"], 3);
    let cold = without_volatile(cold);
    assert_eq!(cold, without_volatile(warm));
    let mut none = without_volatile(serde_json::from_str(&none).unwrap());
    // only the thread count differs, and it is not echoed
    none["input"] = cold["input"].clone();
    assert_eq!(cold, none);
    assert!(dir.path().join("p5h2d3M1/a0_1/m3").exists());
}

#[test]
fn cache_dir_from_environment_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = Command::new(env!("CARGO_BIN_EXE_lslopes"))
        .args(["--p", "5", "--d", "3", "--route", "lfun", "--out", report.to_str().unwrap()])
        .env("LSLOPES_CACHE_DIR", dir.path().join("c"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("c/p5h1d3M1/a1/m1").exists());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "match");
}
