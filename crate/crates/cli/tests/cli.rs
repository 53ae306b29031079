mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::data;
use serde_json::Value;

fn mscott(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mscott"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = mscott(&all);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

/// Compares text output with `tests/golden/<name>.txt`; set
/// `MSCOTT_BLESS=1` to rewrite the file.
fn golden(name: &str, args: &[&str]) {
    let out = mscott(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    // Paths differ between checkouts.
    let text = text.replace(&path(""), "data/");
    let file = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.txt"));
    if std::env::var_os("MSCOTT_BLESS").is_some() {
        std::fs::write(&file, &text).unwrap();
    }
    let want = std::fs::read_to_string(&file)
        .unwrap_or_else(|_| panic!("missing golden file {}", file.display()));
    assert_eq!(text, want, "golden mismatch for {name}");
}

#[test]
fn validate_accepts_three_point() {
    let out = mscott(&["validate", &path("three_point.ms")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&["validate", &path("three_point.ms")]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn validate_rejects_triangle_violation() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ms");
    std::fs::write(
        &bad,
        "mscott/1\n[points]\na b c\n[metric]\nb: 1/10\nc: 1/10 1\n",
    )
    .unwrap();
    let out = mscott(&["validate", bad.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"][0]["kind"], "triangle");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mscott(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mscott(&["validate"]).status.code(), Some(2));
    assert_eq!(
        mscott(&["scott-rank", &path("two_point.ms"), "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mscott(&["r0", &path("two_point.ms"), "p", "nowhere"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mscott(&["fixpoint", &path("two_point.ms"), "--q", "half"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn domain_errors_exit_1() {
    let out = mscott(&["eval", &path("two_point.ms"), "R(v0)", "p"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(
        mscott(&["validate", &path("missing.ms")]).status.code(),
        Some(1)
    );
}

#[test]
fn eval_inline_and_from_file() {
    let v = json(&["eval", &path("three_point.ms"), "sup v1 . d(v0, v1)", "y"]);
    assert_eq!(v["value"], "3/5");
    let f = format!("@{}", path("far_apart.mscott"));
    let v = json(&["eval", &path("three_point.ms"), &f, "x"]);
    assert_eq!(v["value"], "2/5");
}

#[test]
fn scott_rank_two_point() {
    let v = json(&["scott-rank", &path("two_point.ms"), "--max-arity", "2"]);
    assert_eq!(v["rank"], 0);
    assert_eq!(v["partial"], false);
    assert_eq!(v["meta"]["config"]["max_arity"], 2);
    assert_eq!(v["meta"]["config"]["family_size"], 200);
    assert_eq!(v["meta"]["certified_slack"], "0");
}

#[test]
fn fixpoint_three_point_entry() {
    let v = json(&["fixpoint", &path("three_point.ms"), "--q", "1/10"]);
    let entry = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["left"] == serde_json::json!(["x"]) && e["right"] == serde_json::json!(["y"]))
        .expect("((x),(y)) enters");
    assert_eq!(entry["stage"], 1);
    assert_eq!(v["q"], "1/10");
}

#[test]
fn json_reports_share_a_shape() {
    let three = path("three_point.ms");
    let reports = [
        json(&["r0", &three, "x,y", "x,z"]),
        json(&["ralpha", &three, "--stage", "1", "--arity", "1"]),
        json(&["scott-rank", &three]),
        json(&["fixpoint", &three, "--q", "1/4"]),
    ];
    for r in &reports {
        assert!(r["command"].is_string());
        let cfg = &r["meta"]["config"];
        for key in ["family_size", "max_arity", "stage_cap", "k_max"] {
            assert!(cfg[key].is_u64(), "{key} in {r}");
        }
        assert!(cfg["grid"].is_string());
        assert!(cfg["omega"].is_string());
        assert!(r["meta"].get("certified_slack").is_some());
    }
    assert_eq!(reports[0]["value"], "1/5");
    assert_eq!(reports[1]["max"], "1/5");
    assert!(reports[1]["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["value"].is_string()));
}

#[test]
fn dense_family_lists_formulas() {
    let v = json(&["dense-family", "--arity", "1", "--count", "3"]);
    let members: Vec<&str> = v["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["formula"].as_str().unwrap())
        .collect();
    assert_eq!(members, ["const(0)", "const(1)", "const(1/2)"]);
}

#[test]
fn golden_outputs() {
    golden("validate", &["validate", &path("square.ms")]);
    golden(
        "eval",
        &[
            "eval",
            &path("marked_triangle.ms"),
            "inf v1 . latmax(P(v1), d(v0, v1))",
            "u",
            "--decimal",
        ],
    );
    golden(
        "dense_family",
        &["dense-family", "--arity", "2", "--count", "12"],
    );
    golden(
        "modulus_floor",
        &[
            "modulus-floor",
            "--values",
            "0,1/64,1/16,9/64,1/4,25/64,9/16,49/64,1",
            "--grid",
            "1/8",
        ],
    );
    golden("r0", &["r0", &path("three_point.ms"), "x,y", "x,z"]);
    golden(
        "ralpha",
        &[
            "ralpha",
            &path("three_point.ms"),
            "--stage",
            "1",
            "--arity",
            "1",
        ],
    );
    golden("scott_rank", &["scott-rank", &path("square.ms")]);
    golden(
        "fixpoint",
        &[
            "fixpoint",
            &path("two_point.ms"),
            "--q",
            "1/10",
            "--max-arity",
            "2",
        ],
    );
}
