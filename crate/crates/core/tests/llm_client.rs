use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use tmeval_core::llm::{HttpModel, LanguageModel, ModelConfig, RetryPolicy, TransportError};

/// Serves the scripted (status, body) responses in order, one per
/// connection, and counts the requests it saw.
fn serve(script: Vec<(u16, &'static str)>) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for (status, body) in script {
            let Ok((stream, _)) = listener.accept() else { return };
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let mut stream = stream;
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}/v1"), hits)
}

const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"hello"}}],"usage":{"prompt_tokens":5,"completion_tokens":1}}"#;

fn config(endpoint: &str) -> ModelConfig {
    ModelConfig {
        endpoint: endpoint.into(),
        model: "test-model".into(),
        timeout_secs: 5,
        retry: RetryPolicy { max_attempts: 3, backoff_base_ms: 1, backoff_max_ms: 5 },
        api_key_env: "TMEVAL_TEST_KEY_UNSET".into(),
        ..ModelConfig::default()
    }
}

#[test]
fn retries_server_errors_then_succeeds() {
    let (url, hits) = serve(vec![(500, "{}"), (429, "{}"), (200, OK)]);
    let m = HttpModel::new(config(&url)).unwrap();
    assert_eq!(m.complete("hi").unwrap(), "hello");
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn auth_failure_is_not_retried() {
    let (url, hits) = serve(vec![(401, "{}"), (200, OK)]);
    let m = HttpModel::new(config(&url)).unwrap();
    assert_eq!(m.complete("hi"), Err(TransportError::Auth { status: 401 }));
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn client_errors_are_fatal_and_server_errors_exhaust() {
    let (url, _) = serve(vec![(400, "bad request")]);
    let m = HttpModel::new(config(&url)).unwrap();
    assert!(matches!(m.complete("hi"), Err(TransportError::Http { status: 400, attempts: 1, .. })));

    let (url, hits) = serve(vec![(503, "{}"), (503, "{}"), (503, "{}")]);
    let m = HttpModel::new(config(&url)).unwrap();
    assert!(matches!(m.complete("hi"), Err(TransportError::Http { status: 503, attempts: 3, .. })));
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn closed_port_reports_attempts() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let m = HttpModel::new(config(&format!("http://127.0.0.1:{port}"))).unwrap();
    let err = m.complete("hi").unwrap_err();
    assert!(err.to_string().contains("after 3 attempt"), "{err}");
}

#[test]
fn malformed_body_is_reported() {
    let (url, _) = serve(vec![(200, r#"{"choices":[]}"#)]);
    let m = HttpModel::new(config(&url)).unwrap();
    assert!(matches!(m.complete("hi"), Err(TransportError::Malformed(_))));
}

#[test]
fn audit_log_records_each_call() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("audit.jsonl");
    let (url, _) = serve(vec![(500, "{}"), (200, OK)]);
    let m = HttpModel::new(ModelConfig { audit_log: Some(log.clone()), ..config(&url) }).unwrap();
    m.complete("prompt text").unwrap();
    let text = std::fs::read_to_string(&log).unwrap();
    let entry: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(entry["attempts"], 2);
    assert_eq!(entry["ok"], true);
    assert_eq!(entry["prompt_tokens"], 5);
    assert_eq!(entry["prompt_sha256"].as_str().unwrap().len(), 64);
    assert!(!text.contains("prompt text"));
}
