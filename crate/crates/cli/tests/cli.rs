use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn semilin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_semilin"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn semilin");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const INTERVALS: &str = "set S in G^1 = { (x) | 0 < x < 1 };\nset T in G^1 = { (x) | 0 <= x <= 1 \\/ 2 <= x <= 3 };\nbetti_c S;\ncomponents T;\nbetti T;\n";

#[test]
fn reports_one_entry_per_command() {
    let out = semilin(&["--no-timing"], INTERVALS);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["version"], 1);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        for key in ["command", "input", "ok", "result", "diagnostics", "ms"] {
            assert!(r.get(key).is_some(), "missing {key} in {r}");
        }
        assert_eq!(r["ok"], true);
        assert_eq!(r["ms"].as_f64(), Some(0.0));
    }
    assert_eq!(reports[0]["result"]["ranks"], serde_json::json!([0, 1]));
    assert_eq!(reports[1]["result"]["count"], 2);
    assert_eq!(reports[2]["result"]["ranks"], serde_json::json!([2]));
}

#[test]
fn reads_script_from_file() {
    let dir = std::env::temp_dir().join(format!("semilin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("intervals.sl");
    std::fs::write(&path, INTERVALS).unwrap();
    let out = semilin(&["--no-timing", path.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out), json(&semilin(&["--no-timing", "-"], INTERVALS)));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn failing_command_exits_one() {
    let out = semilin(&["--no-timing"], "set S in G^1 = { (x) | 0 < x < 1 };\nbetti S;\n");
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["reports"][0]["ok"], false);
}

#[test]
fn syntax_error_exits_two_with_location() {
    let out = semilin(&[], "set S in G^1 = { (x) | x <= };\n");
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    let e = &v["error"];
    assert_eq!(e["kind"], "syntax");
    assert_eq!(e["line"], 1);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn semantic_error_exits_two() {
    let out = semilin(&[], "set S in G^1 = { (x) | y <= 1 };\n");
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "semantic");
}

#[test]
fn output_is_deterministic_and_parallel_agrees() {
    let src = "family F in G^2 by w = { (x, w) | 0 <= x <= w } union { (x, inf) | 0 <= x } union { (inf, inf) | true };\nscan F by w;\nset X in G^1 = { (x) | 0 <= x <= 2 };\nset U in G^1 = { (x) | 0 <= x <= 1 };\nset V in G^1 = { (x) | 1 <= x <= 2 };\nmv X U V;\n";
    let a = semilin(&["--no-timing", "--seed", "5"], src);
    let b = semilin(&["--no-timing", "--seed", "5"], src);
    let c = semilin(&["--no-timing", "--seed", "5", "--parallel"], src);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v = json(&a);
    assert_eq!(v["reports"][0]["result"]["certified"], true);
    assert_eq!(v["reports"][1]["result"]["exact"], true);
}

#[test]
fn coefficient_ring_flag() {
    let src = "set S in G^2 = { (x, y) | 0 <= x <= 1 /\\ 0 <= y <= 1 } minus { (x, y) | 0 < x < 1 /\\ 0 < y < 1 };\nbetti S;\n";
    for ring in ["Q", "Z", "Z2"] {
        let out = semilin(&["--no-timing", "--coeff", ring], src);
        assert_eq!(out.status.code(), Some(0));
        let r = &json(&out)["reports"][0]["result"];
        assert_eq!(r["ranks"], serde_json::json!([1, 1]), "over {ring}");
    }
}

#[test]
fn validate_and_text_modes() {
    let out = semilin(&["--no-timing", "--validate"], INTERVALS);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = semilin(&["--text"], INTERVALS);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);
}
