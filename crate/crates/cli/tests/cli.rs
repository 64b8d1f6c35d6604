use std::path::Path;
use std::process::{Command, Output};

fn tmeval(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmeval")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn generate_evaluate_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = tmeval(&["generate", "--kind", "fol_synthetic", "--preset", "tiny", "--output-dir", "gen"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("gen/manifest.json").exists());

    let out = tmeval(&["generate", "--manifest", "gen/manifest.json", "--output-dir", "again"], d);
    assert!(out.status.success());
    assert_eq!(std::fs::read(d.join("gen/dataset.jsonl")).unwrap(), std::fs::read(d.join("again/dataset.jsonl")).unwrap());

    let out = tmeval(&["evaluate", "--dataset", "gen/dataset.jsonl", "--model", "perfect-oracle", "--model", "noncompliant", "--output-dir", "run"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("run/report-noncompliant.csv").exists());

    let out = tmeval(&["report", "--output-dir", "run"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "kind = \"regex\"\npreset = \"tiny\"\nmetric = \"cfg_depth\"\nmodel = \"negation-dropper\"\noutput_dir = \"o\"\n").unwrap();
    let out = tmeval(&["evaluate", "-c", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o/report-negation-dropper.json").exists());
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "colour = \"red\"\n").unwrap();
    let out = tmeval(&["evaluate", "-c", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn transport_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    std::fs::write(
        dir.path().join("r.toml"),
        format!("kind = \"pl\"\npreset = \"tiny\"\ndepth = 3\nbatches = 1\nendpoint = \"http://127.0.0.1:{port}\"\nmodel = \"m\"\nmax_attempts = 1\n"),
    )
    .unwrap();
    let out = tmeval(&["evaluate", "-c", "r.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_prints_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmeval(&["verify", "--lang", "fol", "¬∀x. Man(x)", "∃y. ¬Man(y)"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "equivalent");

    let out = tmeval(&["verify", "--lang", "regex", "0*", "(0)*0*"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "equivalent");

    let out = tmeval(&["verify", "--lang", "pl", "(p ∧ q)", "(p ∨ q)"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "not_equivalent");

    let out = tmeval(&["verify", "--lang", "pl", "(p ∧", "p"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
