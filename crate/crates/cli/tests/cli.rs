use std::process::{Command, Output};

use serde_json::Value;

fn intervals(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intervals"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--report", "json"]);
    let out = intervals(&all);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

#[test]
fn constant_fp_interval() {
    let (code, v) = json(&["interval", "fp-order/f=3", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["size"], 3);
    assert_eq!(v["oracle"]["size"], 3);
    assert_eq!(v["matches"]["size"], true);
}

#[test]
fn offset_interval_in_both_modes() {
    for mode in ["walk", "bruteforce"] {
        let (code, v) = json(&["interval", "offset-order/f=1,p=2", "1", "--mode", mode]);
        assert_eq!(code, 0, "{mode}");
        assert_eq!(v["computed"]["size"], 5, "{mode}");
    }
}

#[test]
fn monsat_counts_agree() {
    let (code, v) = json(&["monsat", "(x1|x2)"]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["count"], 3);
    assert_eq!(v["oracle"]["count"], 3);
}

#[test]
fn monsat_reads_files() {
    let path = std::env::temp_dir().join("intervals-cli-formula.txt");
    std::fs::write(&path, "((x1&x2)|x3)\n").unwrap();
    let (code, v) = json(&[
        "monsat",
        "--file",
        path.to_str().unwrap(),
        "--mode",
        "bruteforce",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["count"], 5);
}

#[test]
fn divisor_routes() {
    let (code, v) = json(&["div", "12"]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["routes"], "4/4/4");
}

#[test]
fn toy_machine_walk() {
    let (code, v) = json(&["tm-walk", "toy", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["s"], 7);
    assert_eq!(v["computed"]["walked"], 32767);
    assert_eq!(v["oracle"]["predicted"], 32767);
}

#[test]
fn machine_spec_file_matches_builtin() {
    let path = std::env::temp_dir().join("intervals-cli-ones.tm");
    std::fs::write(&path, intervals::tm::ONES_COUNT_SPEC).unwrap();
    let (code, v) = json(&["tm-walk", path.to_str().unwrap(), "11"]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["walked"], 32768);
}

#[test]
fn cluster_reports() {
    let (code, v) = json(&["cluster", "ones-window", "11"]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["cl count"], 3);
    assert_eq!(v["computed"]["uniqueness detector"], 0);
    let (code, v) = json(&["cluster", "fp/ones", "101", "--order", "ift"]);
    assert_eq!(code, 0);
    assert_eq!(v["computed"]["cl count"], 2);
}

#[test]
fn bad_input_is_a_usage_error() {
    for args in [
        vec!["interval", "fp/nope", "0"],
        vec!["interval", "nowhere/ones", "0"],
        vec!["interval", "fp/ones", "01x"],
        vec!["check", "nope"],
        vec!["monsat", "(x1|"],
        vec!["cluster", "nope", "0"],
    ] {
        let out = intervals(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn reports_are_deterministic() {
    let a = intervals(&["interval", "upsv/ones-plus-one", "10", "--report", "json"]);
    let b = intervals(&["interval", "upsv/ones-plus-one", "10", "--report", "json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn all_suites_pass_at_small_caps() {
    let out = intervals(&[
        "check",
        "all",
        "--max-len",
        "1",
        "--max-m",
        "300",
        "--random-formulas",
        "20",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn broken_orders_are_named() {
    for (kind, word) in [
        ("reflexivity", "reflexivity"),
        ("antisymmetry", "antisymmetry"),
        ("transitivity", "transitivity"),
        ("totality", "totality"),
    ] {
        let (code, v) = json(&["check", "orders", "--max-len", "0", "--inject", kind]);
        assert_eq!(code, 1, "{kind}");
        let notes = v["notes"].to_string();
        assert!(notes.contains(word), "{kind}: {notes}");
    }
}
