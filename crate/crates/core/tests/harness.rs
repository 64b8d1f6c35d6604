use std::fs;

use tmeval_core::harness::{cmd_correlate, cmd_evaluate, cmd_generate, cmd_judge, cmd_report, HarnessError, RunConfig};

fn base(dir: &std::path::Path) -> RunConfig {
    RunConfig { kind: Some("pl".into()), preset: Some("tiny".into()), output_dir: dir.to_path_buf(), ..RunConfig::default() }
}

#[test]
fn custom_grammar_with_undeclared_symbol_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    fs::write(
        &g,
        r#"{"language": "propositional", "start": "S", "nonterminals": ["S"], "terminals": ["v"],
            "rules": [{"lhs": "S", "rhs": "S ⊕ S"}, {"lhs": "S", "rhs": "v"}]}"#,
    )
    .unwrap();
    let cfg = RunConfig { grammar_file: Some(g), output_dir: dir.path().into(), ..RunConfig::default() };
    let err = cmd_generate(&cfg).unwrap_err();
    assert!(err.to_string().contains('⊕'), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn evaluate_report_judge_correlate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { models: vec!["perfect-oracle".into(), "negation-dropper".into(), "noncompliant".into()], ..base(dir.path()) };
    let out = cmd_evaluate(&cfg).unwrap();
    assert_eq!(out.exit_code(), 0);
    let report = fs::read_to_string(dir.path().join("report-perfect-oracle.json")).unwrap();
    let before = report.clone();
    cmd_report(&cfg).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("report-perfect-oracle.json")).unwrap(), before);

    let judge = RunConfig {
        judge_source: Some(dir.path().join("results-negation-dropper.jsonl")),
        models: vec!["perfect-oracle".into()],
        ..base(dir.path())
    };
    cmd_judge(&judge).unwrap();
    let j: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("judge-perfect-oracle.json")).unwrap()).unwrap();
    assert_eq!(j["f1_exact"], "1");

    let table = dir.path().join("scores.csv");
    fs::write(&table, "model,benchmark,score\nperfect-oracle,B1,0.9\nnegation-dropper,B1,0.5\nnoncompliant,B1,0.1\nperfect-oracle,B2,0.3\n").unwrap();
    let corr = RunConfig { score_table: Some(table), ..cfg.clone() };
    cmd_correlate(&corr).unwrap();
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("correlation.json")).unwrap()).unwrap();
    let rows = c["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["power_exact"], "1");
    assert!(rows[0]["rho"].as_f64().unwrap() > 0.9);
}

#[test]
fn correlate_without_overlap_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    cmd_evaluate(&base(dir.path())).unwrap();
    let table = dir.path().join("scores.csv");
    fs::write(&table, "model,benchmark,score\nother,B1,0.9\nelse,B1,0.5\n").unwrap();
    let err = cmd_correlate(&RunConfig { score_table: Some(table), ..base(dir.path()) }).unwrap_err();
    assert!(matches!(err, HarnessError::InsufficientOverlap(_)));
}

#[test]
fn unreachable_endpoint_exits_with_transport_code() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = RunConfig {
        endpoint: format!("http://127.0.0.1:{port}"),
        model: "remote".into(),
        max_attempts: Some(1),
        backoff_base_ms: Some(1),
        depth: Some(3),
        batches: Some(1),
        ..base(dir.path())
    };
    let out = cmd_evaluate(&cfg).unwrap();
    assert!(out.transport_failures > 0);
    assert_eq!(out.exit_code(), 2);
}
