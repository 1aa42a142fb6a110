use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-expsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn pair_of_word() {
    let v = json(&["pairs", "word", "ABAAAB"]);
    assert_eq!(v["k"], "11/82");
    assert_eq!(v["l"], "57/82");
    assert_eq!(v["theta"], "27/164");
}

#[test]
fn datum_fields() {
    let v = json(&["pairs", "datum", "B", "--p", "7", "--kappa", "2"]);
    for key in ["k", "l", "theta", "r", "delta", "n0", "u0", "kappa0", "lambda0"] {
        assert!(v[key].is_string(), "missing {key}");
    }
    assert_eq!(v["n0"], "3");
}

#[test]
fn gauss_vanishes_mod_two() {
    let v = json(&["gauss", "--p", "2", "--n", "1", "--a", "1"]);
    assert_eq!(v["re"], 0.0);
    assert_eq!(v["im"], 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["gauss", "--p", "5"]).status.code(), Some(2));
    assert_eq!(run(&["gauss", "--p", "6", "--n", "2", "--a", "1"]).status.code(), Some(2));
    assert_eq!(run(&["pairs", "word", "ABX"]).status.code(), Some(2));
    assert_eq!(run(&["sum", "--p", "5", "--n", "12", "--B", "100000000"]).status.code(), Some(3));
}

#[test]
fn output_independent_of_workers() {
    let args = ["charsum", "--p", "7", "--n", "5", "--a0", "3", "--psi", "2", "--M", "-500", "--B", "200000"];
    let one = run(&[&["--workers", "1"], &args[..]].concat());
    let four = run(&[&["--workers", "4"], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn out_file() {
    let dir = std::env::temp_dir().join(format!("padic-expsum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let out = run(&["datum-check", "--p", "5", "--n", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("p,n,w,kappa,B,abs_S,rhs,ratio\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn poisson_sides_agree() {
    let v = json(&["poisson", "--p", "7", "--n", "5", "--B", "40", "--phase", "salie", "--c", "2"]);
    assert!(v["rel_error"].as_f64().unwrap() < 1e-7);
}

#[test]
fn verify_all_quick() {
    let out = run(&["verify-all", "--quick"]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert_eq!(table.lines().count(), 12);
    assert!(table.lines().nth(2).unwrap().contains("XFAIL"));
}
