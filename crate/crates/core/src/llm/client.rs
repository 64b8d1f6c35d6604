//! Chat-completion client over HTTP with retries, a shared rate limiter and
//! an optional JSONL audit log.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{LanguageModel, ModelConfig, TransportError};

/// Caps concurrent requests and, optionally, their rate (token bucket with
/// a one-minute burst).
#[derive(Debug)]
pub struct RateLimiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    max_concurrent: usize,
    bucket: Option<Mutex<Bucket>>,
}

#[derive(Debug)]
struct Bucket {
    tokens: f64,
    capacity: f64,
    per_sec: f64,
    last: Instant,
}

pub struct Permit<'a> {
    limiter: &'a RateLimiter,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.limiter.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.limiter.freed.notify_one();
    }
}

impl RateLimiter {
    pub fn new(max_concurrent: usize, requests_per_minute: Option<f64>) -> Self {
        let bucket = requests_per_minute.filter(|r| *r > 0.0).map(|rpm| {
            Mutex::new(Bucket { tokens: rpm.max(1.0), capacity: rpm.max(1.0), per_sec: rpm / 60.0, last: Instant::now() })
        });
        Self { in_flight: Mutex::new(0), freed: Condvar::new(), max_concurrent: max_concurrent.max(1), bucket }
    }

    /// Blocks until a request may be sent.
    pub fn acquire(&self) -> Permit<'_> {
        {
            let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
            while *n >= self.max_concurrent {
                n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
            }
            *n += 1;
        }
        if let Some(bucket) = &self.bucket {
            loop {
                let wait = {
                    let mut b = bucket.lock().unwrap_or_else(|e| e.into_inner());
                    let now = Instant::now();
                    b.tokens = (b.tokens + now.duration_since(b.last).as_secs_f64() * b.per_sec).min(b.capacity);
                    b.last = now;
                    if b.tokens >= 1.0 {
                        b.tokens -= 1.0;
                        None
                    } else {
                        Some(Duration::from_secs_f64((1.0 - b.tokens) / b.per_sec))
                    }
                };
                match wait {
                    None => break,
                    Some(d) => std::thread::sleep(d),
                }
            }
        }
        Permit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        *self.in_flight.lock().unwrap_or_else(|e| e.into_inner())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub schema_version: u32,
    pub model: String,
    pub prompt_sha256: String,
    pub attempts: u32,
    pub latency_ms: u64,
    pub ok: bool,
    pub status: Option<u16>,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    pub error: Option<String>,
}

/// Append-only JSONL request log.
#[derive(Debug)]
pub struct AuditLog {
    file: Mutex<File>,
}

impl AuditLog {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file: Mutex::new(file) })
    }

    pub fn record(&self, entry: &AuditEntry) {
        let mut line = serde_json::to_string(entry).unwrap_or_default();
        line.push('\n');
        let mut f = self.file.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = f.write_all(line.as_bytes()) {
            log::warn!("audit log write failed: {e}");
        }
    }
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Client for an OpenAI-compatible `/chat/completions` endpoint.
pub struct HttpModel {
    cfg: ModelConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    limiter: RateLimiter,
    audit: Option<AuditLog>,
}

#[derive(Debug, Default)]
struct Usage {
    prompt_tokens: Option<u64>,
    completion_tokens: Option<u64>,
}

enum Attempt {
    Done(String, Usage),
    Retry(TransportError, Option<Duration>),
    Fatal(TransportError),
}

impl HttpModel {
    pub fn new(cfg: ModelConfig) -> Result<Self, TransportError> {
        cfg.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        let audit = match &cfg.audit_log {
            Some(p) => Some(AuditLog::open(p).map_err(|e| TransportError::Config(format!("audit log {}: {e}", p.display())))?),
            None => None,
        };
        let limiter = RateLimiter::new(cfg.max_concurrent, cfg.requests_per_minute);
        Ok(Self { cfg, agent, api_key, limiter, audit })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.cfg.endpoint.trim_end_matches('/'))
    }

    fn attempt(&self, prompt: &str, attempts: u32) -> Attempt {
        let body = json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        });
        let mut req = self.agent.post(&self.url()).header("Content-Type", "application/json");
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = match req.send(body.to_string().as_bytes()) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Attempt::Retry(TransportError::Timeout { attempts }, None),
            Err(e) => return Attempt::Retry(TransportError::Unreachable { attempts, message: e.to_string() }, None),
        };
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => return Attempt::Retry(TransportError::Timeout { attempts }, None),
            Err(e) => return Attempt::Retry(TransportError::Unreachable { attempts, message: e.to_string() }, None),
        };
        match status {
            200..=299 => match parse_completion(&text) {
                Ok((content, usage)) => Attempt::Done(content, usage),
                Err(e) => Attempt::Fatal(e),
            },
            401 | 403 => Attempt::Fatal(TransportError::Auth { status }),
            429 | 500..=599 => Attempt::Retry(TransportError::Http { status, attempts, body: truncate(&text) }, retry_after),
            _ => Attempt::Fatal(TransportError::Http { status, attempts, body: truncate(&text) }),
        }
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(200).collect()
}

fn parse_completion(text: &str) -> Result<(String, Usage), TransportError> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| TransportError::Malformed(e.to_string()))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .ok_or_else(|| TransportError::Malformed("missing choices[0].message.content".into()))?;
    let usage = Usage {
        prompt_tokens: v.pointer("/usage/prompt_tokens").and_then(|t| t.as_u64()),
        completion_tokens: v.pointer("/usage/completion_tokens").and_then(|t| t.as_u64()),
    };
    Ok((content.to_string(), usage))
}

fn with_attempts(e: TransportError, n: u32) -> TransportError {
    match e {
        TransportError::Unreachable { message, .. } => TransportError::Unreachable { attempts: n, message },
        TransportError::Http { status, body, .. } => TransportError::Http { status, attempts: n, body },
        TransportError::Timeout { .. } => TransportError::Timeout { attempts: n },
        other => other,
    }
}

impl LanguageModel for HttpModel {
    fn name(&self) -> &str {
        &self.cfg.model
    }

    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let _permit = self.limiter.acquire();
        let started = Instant::now();
        let max = self.cfg.retry.max_attempts.max(1);
        let mut attempts = 0;
        let result = loop {
            attempts += 1;
            match self.attempt(prompt, attempts) {
                Attempt::Done(text, usage) => break Ok((text, usage)),
                Attempt::Fatal(e) => break Err(e),
                Attempt::Retry(e, after) => {
                    if attempts >= max {
                        break Err(with_attempts(e, attempts));
                    }
                    let delay = after.unwrap_or_else(|| self.cfg.retry.backoff(attempts));
                    log::debug!("{}: attempt {attempts} failed ({e}); retrying in {delay:?}", self.cfg.model);
                    std::thread::sleep(delay);
                }
            }
        };
        if let Some(audit) = &self.audit {
            let (ok, usage, error, status) = match &result {
                Ok((_, u)) => (true, Usage { prompt_tokens: u.prompt_tokens, completion_tokens: u.completion_tokens }, None, Some(200)),
                Err(e) => {
                    let status = match e {
                        TransportError::Http { status, .. } | TransportError::Auth { status } => Some(*status),
                        _ => None,
                    };
                    (false, Usage::default(), Some(e.to_string()), status)
                }
            };
            audit.record(&AuditEntry {
                schema_version: 1,
                model: self.cfg.model.clone(),
                prompt_sha256: prompt_hash(prompt),
                attempts,
                latency_ms: started.elapsed().as_millis() as u64,
                ok,
                status,
                prompt_tokens: usage.prompt_tokens,
                completion_tokens: usage.completion_tokens,
                error,
            });
        }
        result.map(|(t, _)| t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_body_parsing() {
        let (c, u) = parse_completion(
            r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}}"#,
        )
        .unwrap();
        assert_eq!(c, "hi");
        assert_eq!(u.prompt_tokens, Some(3));
        assert!(matches!(parse_completion("{}"), Err(TransportError::Malformed(_))));
    }

    #[test]
    fn limiter_caps_concurrency() {
        let l = RateLimiter::new(2, None);
        let a = l.acquire();
        let _b = l.acquire();
        assert_eq!(l.in_flight(), 2);
        drop(a);
        assert_eq!(l.in_flight(), 1);
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(prompt_hash("").len(), 64);
        assert!(prompt_hash("abc").starts_with("ba7816bf"));
    }
}
