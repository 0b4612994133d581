//! Plans attempts, drives a backend with retries and rate limiting, and
//! commits results in plan order.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::backend::{Backend, BackendError, ChatRequest};
use super::extract::extract_code;
use super::prompt::{render_prompt, PromptTier};
use crate::detector::SmellInstance;
use crate::smell::SmellType;
use crate::snippets::SmellSnippet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `n` (0-based): `base * 2^n`, capped.
    pub fn delay(&self, n: u32) -> Duration {
        let factor = 1u32.checked_shl(n).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Shared request budget: `burst` tokens, refilled at `per_sec`.
pub struct TokenBucket {
    per_sec: f64,
    burst: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(per_sec: f64, burst: u32) -> Self {
        assert!(per_sec > 0.0, "refill rate must be positive");
        let burst = f64::from(burst.max(1));
        Self {
            per_sec,
            burst,
            state: Mutex::new((burst, Instant::now())),
        }
    }

    /// Blocks until a token is available and takes it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().expect("bucket lock");
                let now = Instant::now();
                let refill = now.duration_since(st.1).as_secs_f64() * self.per_sec;
                st.0 = (st.0 + refill).min(self.burst);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - st.0) / self.per_sec)
            };
            std::thread::sleep(wait);
        }
    }
}

/// Source of attempt timestamps. `Fixed` makes runs reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    /// `Fixed` at `SOURCE_DATE_EPOCH` when that is set to a valid epoch.
    pub fn from_env() -> Self {
        std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse::<i64>().ok())
            .and_then(|s| DateTime::from_timestamp(s, 0))
            .map_or(Clock::System, Clock::Fixed)
    }

    pub fn now(&self) -> String {
        let t = match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        };
        t.to_rfc3339_opts(SecondsFormat::Secs, true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptError {
    /// `backend_unavailable`, `rate_limited`, `missing_record` or `rejected`.
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retry_after_ms: Option<u64>,
}

impl From<&BackendError> for AttemptError {
    fn from(e: &BackendError) -> Self {
        let (kind, retry_after_ms) = match e {
            BackendError::Unavailable(_) => ("backend_unavailable", None),
            BackendError::RateLimited { retry_after } => ("rate_limited", retry_after.map(|d| d.as_millis() as u64)),
            BackendError::MissingRecord(_) => ("missing_record", None),
            BackendError::Rejected(_) => ("rejected", None),
        };
        Self {
            kind: kind.to_string(),
            message: e.to_string(),
            retry_after_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixAttempt {
    /// Position in the attempt plan.
    pub seq: usize,
    pub snippet_id: String,
    /// Smell types the snippet was selected for.
    pub snippet_smells: Vec<SmellType>,
    pub target_smell: SmellInstance,
    pub tier: PromptTier,
    pub prompt_text: String,
    pub raw_response: String,
    pub extracted_code: Option<String>,
    pub backend_id: String,
    pub tries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<AttemptError>,
    pub timestamp: String,
}

impl FixAttempt {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AttemptRequest<'a> {
    pub snippet: &'a SmellSnippet,
    pub target: &'a SmellInstance,
    pub tier: PromptTier,
}

impl AttemptRequest<'_> {
    pub fn chat_request(&self) -> ChatRequest {
        ChatRequest {
            snippet_id: self.snippet.snippet_id.clone(),
            tier: self.tier,
            target: self.target.smell_type,
            prompt_text: render_prompt(self.tier, Some(self.target.smell_type)).expect("smell is always supplied"),
            snippet_text: self.snippet.text.clone(),
        }
    }
}

/// Snippet order, then each distinct target type, then each tier.
pub fn plan_attempts<'a>(snippets: &'a [SmellSnippet], tiers: &[PromptTier]) -> Vec<AttemptRequest<'a>> {
    let mut tiers = tiers.to_vec();
    tiers.sort();
    tiers.dedup();
    let mut plan = Vec::new();
    for snippet in snippets {
        for target in snippet.targets() {
            for &tier in &tiers {
                plan.push(AttemptRequest { snippet, target, tier });
            }
        }
    }
    plan
}

/// Sends one request, retrying transport failures and rate limits.
/// Failures end up in the attempt's error field.
pub fn submit(
    seq: usize,
    request: &AttemptRequest<'_>,
    backend: &dyn Backend,
    retry: &RetryPolicy,
    bucket: Option<&TokenBucket>,
    clock: &Clock,
) -> FixAttempt {
    let chat = request.chat_request();
    let mut tries = 0;
    let outcome = loop {
        if let Some(b) = bucket {
            b.acquire();
        }
        tries += 1;
        match backend.complete(&chat) {
            Ok(text) => break Ok(text),
            Err(e) if e.is_retryable() && tries <= retry.max_retries => {
                let wait = match &e {
                    BackendError::RateLimited { retry_after: Some(d) } => *d,
                    _ => retry.delay(tries - 1),
                };
                tracing::debug!(snippet = %chat.snippet_id, tier = %chat.tier, tries, "retrying after {e}");
                std::thread::sleep(wait);
            }
            Err(e) => break Err(e),
        }
    };
    let (raw_response, extracted_code, error) = match outcome {
        Ok(text) => {
            let code = extract_code(&text);
            (text, code, None)
        }
        Err(e) => {
            tracing::warn!(snippet = %chat.snippet_id, tier = %chat.tier, "attempt failed: {e}");
            (String::new(), None, Some(AttemptError::from(&e)))
        }
    };
    FixAttempt {
        seq,
        snippet_id: chat.snippet_id,
        snippet_smells: request.snippet.smell_types(),
        target_smell: request.target.clone(),
        tier: chat.tier,
        prompt_text: chat.prompt_text,
        raw_response,
        extracted_code,
        backend_id: backend.descriptor().backend_id.clone(),
        tries,
        error,
        timestamp: clock.now(),
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    /// Requests per second across all workers; `None` is unlimited.
    pub rate_per_sec: Option<f64>,
    pub clock: Clock,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            rate_per_sec: None,
            clock: Clock::System,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub attempts: usize,
    pub errored: usize,
}

/// Runs the whole plan with up to `max_in_flight` concurrent requests.
/// `commit` sees every attempt exactly once, in plan order, as soon as all
/// earlier attempts have completed.
pub fn run_attempts<E>(
    plan: &[AttemptRequest<'_>],
    backend: &dyn Backend,
    opts: &RunOptions,
    mut commit: impl FnMut(&FixAttempt) -> Result<(), E>,
) -> Result<RunSummary, E> {
    let bucket = opts.rate_per_sec.map(|r| TokenBucket::new(r, 1));
    let workers = opts.max_in_flight.clamp(1, plan.len().max(1));
    let next = AtomicUsize::new(0);
    let mut summary = RunSummary::default();
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<FixAttempt>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, bucket) = (&next, bucket.as_ref());
            scope.spawn(move || loop {
                let seq = next.fetch_add(1, Ordering::Relaxed);
                let Some(req) = plan.get(seq) else { break };
                let attempt = submit(seq, req, backend, &opts.retry, bucket, &opts.clock);
                if tx.send(attempt).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut want = 0;
        for attempt in rx {
            pending.insert(attempt.seq, attempt);
            while let Some(a) = pending.remove(&want) {
                summary.attempts += 1;
                summary.errored += usize::from(a.is_error());
                if let Err(e) = commit(&a) {
                    // stop handing out work; in-flight requests finish and are discarded
                    next.store(plan.len(), Ordering::Relaxed);
                    return Err(e);
                }
                want += 1;
            }
        }
        Ok(summary)
    })
}

pub fn write_attempt(w: &mut impl Write, attempt: &FixAttempt) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, attempt)?;
    w.write_all(b"\n")
}

#[derive(Debug, thiserror::Error)]
pub enum AttemptStoreError {
    #[error("attempts store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("attempts store line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub fn read_attempts(r: impl BufRead) -> Result<Vec<FixAttempt>, AttemptStoreError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| AttemptStoreError::Record { line: i + 1, source })?);
    }
    Ok(out)
}
