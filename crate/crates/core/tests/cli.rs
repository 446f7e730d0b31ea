use std::process::{Command, Output};

fn twogen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twogen")).args(args).output().unwrap()
}

#[test]
fn norm_list_matches_and_exits_zero() {
    let out = twogen(&["lists", "--stage", "norm", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().lines().count() > 86);
}

#[test]
fn search_prints_one_json_line_per_stage() {
    let out = twogen(&["search", "--p", "6", "--q", "6", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let stages: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(stages[0]["stage"], "c0");
    assert!(stages.iter().any(|s| s["stage"] == "free_inconclusive"));
}

#[test]
fn partial_survivor_set_is_a_golden_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = twogen(&["filter", "--p", "6", "--q", "6", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let file = dir.path().join("survivors.json");
    std::fs::write(&file, &out.stdout).unwrap();
    let report = dir.path().join("report.json");
    let out = twogen(&["golden", "--compare", file.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    assert!(rep["rows"].as_array().unwrap().iter().any(|r| r["found"] == true));
}

#[test]
fn bad_override_exits_one() {
    let out = twogen(&["search", "--p", "6", "--q", "6", "--r", "2", "--set", "slack=-1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = twogen(&["search", "--p", "6", "--q", "6", "--r", "2", "--set", "nonsense=3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn free_and_plot_commands() {
    let out = twogen(&["free", "--p", "10", "--q", "10", "--gamma", "-4.918226,5.698268"]);
    assert_eq!(out.status.code(), Some(0));
    let o: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(o["verdict"].is_string());
    let out = twogen(&["plot", "circles", "6", "6", "-2,3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("<svg"));
}
