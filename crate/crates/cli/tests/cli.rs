use std::process::Command;

use nogolab_core::harness::ExperimentReport;

fn nogolab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nogolab"))
}

#[test]
fn writes_json_report_and_exits_zero_on_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("clone.json");
    let status = nogolab()
        .args(["clone-check", "--m", "4", "--n", "2", "--trials", "3", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let r = ExperimentReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.name, "clone-check");
    assert_eq!(r.seed, 7);
    assert!(r.passed);
    assert!(r.get("min_clone_fidelity").unwrap() >= 1.0 - 1e-9);
}

#[test]
fn csv_goes_to_stdout() {
    let out = nogolab().args(["lemma-a", "--trials", "50", "--seed", "2", "--format", "csv"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("experiment,seed,metric,value"));
    assert!(text.contains("lemma-a,2,min_slack,"));
    assert!(text.contains("lemma-a,2,passed,1"));
}

#[test]
fn failing_report_exits_one() {
    let out = nogolab().args(["bbbv-swap", "--trials", "30", "--seed", "1"]).output().unwrap();
    let r = ExperimentReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(out.status.code(), Some(if r.passed { 0 } else { 1 }));
}

#[test]
fn errors_exit_two() {
    let out = nogolab().args(["no-such-experiment"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
    let out = nogolab().args(["rohc", "--trials", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = nogolab().args(["rohc", "--m", "9", "--n", "2"]).env("NOGOLAB_CAP", "6").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NOGOLAB_CAP"));
}

#[test]
fn same_seed_same_metrics() {
    let run = || {
        let out = nogolab().args(["nogo-equiv", "--trials", "40", "--seed", "5"]).output().unwrap();
        ExperimentReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap()
    };
    assert_eq!(run().fingerprint().metrics, run().fingerprint().metrics);
}
