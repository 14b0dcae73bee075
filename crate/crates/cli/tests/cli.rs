use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobolev-ladder"))
        .args(args)
        .env("SOBOLEV_LADDER_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

const CORRUPT_FAMILY: &str = r#"{
    "family": {
        "name": "bad-charlier",
        "mode": {"kind": "forward_difference"},
        "alpha": ["1", "2", "3", "4", "5"],
        "beta": ["1", "2", "3", "4"],
        "h0": "1",
        "A": ["1"],
        "B": {"const": "0"},
        "C": ["1", "2", "4", "4"],
        "max_n": 4
    },
    "M": "1", "j": 1, "c": "0"
}"#;

#[test]
fn families_lists_builtins() {
    let o = run(&["families"]);
    assert_eq!(code(&o), 0);
    let names: Vec<_> = stdout_json(&o)
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(names, ["charlier", "hermite", "alsalamcarlitz1"]);
}

#[test]
fn compute_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.json");
    let o = run(&[
        "compute",
        "--family",
        "hermite",
        "--M",
        "1",
        "--c",
        "0",
        "--j",
        "1",
        "--n",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["rows"][3]["Q_pretty"], "x^3 - 1/2 x");
    assert_eq!(
        v["rows"][3]["Q"],
        serde_json::json!(["0", "-1/2", "0", "1"])
    );
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn compute_csv_flattens_coefficients() {
    let o = run(&[
        "compute", "--family", "hermite", "--M", "1", "--j", "1", "--n", "3", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "n,rho,K_jj,q_0,q_1,q_2,q_3");
    assert_eq!(lines[4], "3,-1/2,2,0,-1/2,0,1");
}

#[test]
fn non_positive_mass_is_rejected() {
    let o = run(&[
        "compute", "--family", "charlier", "--a", "1", "--M", "0/1", "--n", "3",
    ]);
    assert_eq!(code(&o), 2);
    let o = run(&["verify", "--suite", "oracle", "--M", "-1", "--n-max", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn holonomic_suite_below_three_is_skipped() {
    let o = run(&["verify", "--suite", "holonomic", "--n-max", "2"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("SKIP holonomic"));
}

#[test]
fn corrupted_family_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    fs::write(&spec, CORRUPT_FAMILY).unwrap();
    let o = run(&["verify", "--spec", spec.to_str().unwrap(), "--n-max", "4"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("structure relation fails at n = 3"));
}

#[test]
fn verify_one_family_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "verify",
        "--family",
        "charlier",
        "--suite",
        "lemmas,ladder,holonomic",
        "--n-max",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["report"]["checks"].as_array().unwrap().len() > 100);
}

#[test]
fn ladder_and_holonomic_outputs() {
    let o = run(&[
        "ladder", "--family", "hermite", "--M", "1", "--j", "1", "--n", "4",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(
        v["by_n"]["3"]["phi"]["1,3"]["num"],
        serde_json::json!(["0", "0", "-1/2", "0", "1"])
    );
    assert_eq!(v["by_n"]["4"]["checks"]["raising"], true);

    let o = run(&[
        "holonomic",
        "--family",
        "alsalamcarlitz1",
        "--M",
        "1/2",
        "--c",
        "1/3",
        "--j",
        "2",
        "--n",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["by_n"]["4"]["verified"], true);
    assert_eq!(v["by_n"]["3"]["raw"].as_array().unwrap().len(), 3);

    let o = run(&["ladder", "--family", "hermite", "--M", "1", "--n", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn mode_override_only_where_valid() {
    let ok = run(&[
        "compute", "--family", "charlier", "--mode", "hahn:1:1", "--M", "1", "--n", "3",
    ]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout_json(&ok)["spec"]["mode"]["kind"], "hahn");
    let bad = run(&[
        "compute",
        "--family",
        "charlier",
        "--mode",
        "derivative",
        "--M",
        "1",
        "--n",
        "3",
    ]);
    assert_eq!(code(&bad), 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["compute", "--M", "1"])), 2);
    assert_eq!(
        code(&run(&["compute", "--family", "legendre", "--M", "1"])),
        2
    );
    assert_eq!(code(&run(&["verify", "--suite", "nonsense"])), 2);
    assert_eq!(code(&run(&["bogus"])), 2);
}
