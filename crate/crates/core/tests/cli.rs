use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gfasym"));
    c.env_remove("GFASYM_PRECISION_BITS");
    c
}

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(format!("{name}.json"))
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("diagnostic JSON on stderr")
}

#[test]
fn expand_writes_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (j, c) = (dir.path().join("out.json"), dir.path().join("out.csv"));
    let o = run(bin().args(["expand", "--input"]).arg(problem("delannoy")).arg("--out-json").arg(&j).arg("--out-csv").arg(&c));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&c).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,exact,approx_1,approx_N,rel_err_1,rel_err_N");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[1], "25");
    assert!(first[4].starts_with("-5.05256")); // one-term error is negative
    assert_eq!(csv.lines().count(), 6);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
    let e = &v["expansion"];
    assert_eq!(e["error_exponent"], "-5/2");
    assert_eq!(e["flattened"][0]["exponent"], "-1/2");
    assert!(e["flattened"][0]["coef"]["re"].as_str().unwrap().starts_with("3.690602771"));
    assert!(e["base"].is_array());
    assert_eq!(v["provenance"]["precision_bits"], 212);
    assert_eq!(v["critical_points"].as_array().unwrap().len(), 2);
}

#[test]
fn output_is_deterministic() {
    let a = run(bin().args(["expand", "--input"]).arg(problem("quantum_walk")));
    let b = run(bin().args(["expand", "--sequential", "--input"]).arg(problem("quantum_walk")));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn flags_override_the_spec() {
    let o = run(bin()
        .args(["expand", "--N", "3", "--n-values", "4,8", "--precision-bits", "160", "--input"])
        .arg(problem("central_binomial")));
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["table"].as_array().unwrap().len(), 2);
    assert_eq!(v["provenance"]["precision_bits"], 160);
    assert_eq!(v["expansion"]["flattened"].as_array().unwrap().len(), 3);
    let o = run(bin().env("GFASYM_PRECISION_BITS", "128").args(["expand", "--input"]).arg(problem("central_binomial")));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["provenance"]["precision_bits"], 128);
}

#[test]
fn origin_on_variety_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_spec(dir.path(), "o.json", r#"{"H": [{"exp": [1, 0], "coef": "1"}, {"exp": [0, 1], "coef": "-1"}], "alpha": ["1", "1"]}"#);
    for cmd in ["expand", "critical", "oracle"] {
        let o = run(bin().args([cmd, "--input"]).arg(&s));
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert_eq!(stderr_json(&o)["diagnostic"]["reason"], "origin on variety");
    }
}

#[test]
fn no_critical_point_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // x_m dH/dx_m = -xyz for every m, so the system forces xyz = 0, off the variety
    let s = write_spec(
        dir.path(),
        "n.json",
        r#"{"H": [{"exp": [0, 0, 0], "coef": "2"}, {"exp": [1, 1, 1], "coef": "-1"}], "alpha": ["1", "2", "3"]}"#,
    );
    let o = run(bin().args(["critical", "--seeds", "[[3, -2, 5]]", "--input"]).arg(&s));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["diagnostic"]["reason"], "no critical point");
    let s2 = write_spec(dir.path(), "n2.json", r#"{"H": [{"exp": [0, 0], "coef": "2"}, {"exp": [1, 1], "coef": "-1"}], "alpha": ["1", "2"]}"#);
    assert_eq!(run(bin().args(["expand", "--input"]).arg(&s2)).status.code(), Some(2));
}

#[test]
fn unknown_minimality_exits_3_unless_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(problem("quantum_walk")).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("overrides");
    let s = write_spec(dir.path(), "q.json", &v.to_string());
    let o = run(bin().args(["expand", "--input"]).arg(&s));
    assert_eq!(o.status.code(), Some(3));
    let d = stderr_json(&o);
    assert_eq!(d["diagnostic"]["points"][0]["minimality"]["verdict"], "unknown");
    let o = run(bin().args(["expand", "--assume-strictly-minimal", "--input"]).arg(&s));
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["provenance"]["overrides"]["applied"][0], "assume_strictly_minimal");
    assert_eq!(v["expansion"]["kind"], "degenerate-odd");
}

#[test]
fn degenerate_in_three_variables_exits_4() {
    let o = run(bin().args(["expand", "--force-degenerate", "--input"]).arg(problem("smirnov_f1")));
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr_json(&o)["error"].as_str().unwrap().contains("dimension 3"));
}

#[test]
fn invalid_spec_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_spec(dir.path(), "b.json", r#"{"H": [{"exp": [0], "coef": "1"}], "alpha": ["1"], "p": 0}"#);
    assert_eq!(run(bin().args(["expand", "--input"]).arg(&s)).status.code(), Some(1));
}

#[test]
fn critical_lists_points() {
    let o = run(bin().args(["critical", "--input"]).arg(problem("delannoy")));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 2);
    let verdicts: Vec<&str> = pts.iter().map(|p| p["minimality"]["verdict"].as_str().unwrap()).collect();
    assert!(verdicts.contains(&"strictly-minimal") && verdicts.contains(&"not-minimal"));
    let o = run(bin().args(["critical", "--input"]).arg(problem("smirnov_f1")));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert!(v[0]["point"][0]["re"].as_str().unwrap().starts_with("3.33333333"));
}

#[test]
fn oracle_rows() {
    let o = run(bin().args(["oracle", "--n-values", "1,2,3,10", "--input"]).arg(problem("central_binomial")));
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let exact: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(exact, ["2", "6", "20", "184756"]);
    let o = run(bin().args(["oracle", "--input"]).arg(problem("quantum_walk")));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().last().unwrap().ends_with("7.744253816e-2"));
}
