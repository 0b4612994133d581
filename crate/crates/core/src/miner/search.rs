//! Paginated code and repository search against a GitHub-style REST API,
//! with an on-disk page cache.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Candidate, CandidateKind, Label, Locator, SearchTerm};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    /// Header names lowercased.
    pub headers: BTreeMap<String, String>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait Transport {
    fn get(&self, url: &str, token: Option<&str>) -> Result<HttpResponse, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("smellfix/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for ReqwestTransport {
    fn get(&self, url: &str, token: Option<&str>) -> Result<HttpResponse, TransportError> {
        let mut req = self.client.get(url).header("Accept", "application/vnd.github+json");
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let headers = resp
            .headers()
            .iter()
            .filter_map(|(k, v)| Some((k.as_str().to_ascii_lowercase(), v.to_str().ok()?.to_string())))
            .collect();
        let body = resp.text().map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpResponse { status, headers, body })
    }
}

/// Raw successful response bodies, one file per URL named by its SHA-256.
#[derive(Debug, Clone)]
pub struct PageCache {
    dir: PathBuf,
}

impl PageCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn path(&self, url: &str) -> PathBuf {
        self.dir.join(format!("{}.json", hex::encode(Sha256::digest(url.as_bytes()))))
    }

    pub fn get(&self, url: &str) -> Option<String> {
        std::fs::read_to_string(self.path(url)).ok()
    }

    pub fn put(&self, url: &str, body: &str) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(self.path(url), body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HostConfig {
    pub api_base: String,
    /// Host name recorded in locators.
    pub host: String,
    /// Environment variable holding the API token.
    pub token_env: Option<String>,
    pub per_page: u32,
    /// Page cap per (term, scope).
    pub max_pages: u32,
    /// How many server back-offs to sit out before giving up.
    pub max_rate_limit_waits: u32,
    pub language: String,
}

impl Default for HostConfig {
    fn default() -> Self {
        Self {
            api_base: "https://api.github.com".into(),
            host: "github.com".into(),
            token_env: Some("GITHUB_TOKEN".into()),
            per_page: 100,
            max_pages: 10,
            max_rate_limit_waits: 3,
            language: "Python".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum MineError {
    #[error("authentication failed (HTTP {status}): {message}")]
    AuthError { status: u16, message: String },
    #[error("rate limited by the host{}", retry_after.map(|d| format!("; retry after {}s", d.as_secs())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("host unreachable: {0}")]
    HostUnreachable(String),
    #[error("unexpected HTTP {status} from {url}")]
    Http { status: u16, url: String },
    #[error("malformed search response from {url}: {message}")]
    Malformed { url: String, message: String },
    #[error("page cache: {0}")]
    Cache(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    Repositories,
    Code,
}

impl Scope {
    fn path(self) -> &'static str {
        match self {
            Scope::Repositories => "repositories",
            Scope::Code => "code",
        }
    }
}

pub struct Miner<'t> {
    transport: &'t dyn Transport,
    cache: Option<PageCache>,
    config: HostConfig,
    token: Option<String>,
    sleep: fn(Duration),
}

impl<'t> Miner<'t> {
    pub fn new(transport: &'t dyn Transport, config: HostConfig, cache: Option<PageCache>) -> Self {
        let token = config.token_env.as_deref().and_then(|v| std::env::var(v).ok());
        Self {
            transport,
            cache,
            config,
            token,
            sleep: std::thread::sleep,
        }
    }

    pub fn with_sleep(mut self, sleep: fn(Duration)) -> Self {
        self.sleep = sleep;
        self
    }

    fn query(&self, term: &SearchTerm, scope: Scope) -> String {
        match scope {
            Scope::Repositories => term.quoted(),
            Scope::Code => format!("{} language:{}", term.quoted(), self.config.language),
        }
    }

    pub fn page_url(&self, term: &SearchTerm, code_scope: bool, page: u32) -> String {
        let scope = if code_scope { Scope::Code } else { Scope::Repositories };
        self.url(term, scope, page)
    }

    fn url(&self, term: &SearchTerm, scope: Scope, page: u32) -> String {
        let base = format!("{}/search/{}", self.config.api_base.trim_end_matches('/'), scope.path());
        let params = [
            ("q", self.query(term, scope)),
            ("per_page", self.config.per_page.to_string()),
            ("page", page.to_string()),
        ];
        url::Url::parse_with_params(&base, &params)
            .map(String::from)
            .unwrap_or_else(|_| base)
    }

    fn fetch(&self, url: &str) -> Result<String, MineError> {
        if let Some(body) = self.cache.as_ref().and_then(|c| c.get(url)) {
            return Ok(body);
        }
        let mut waits = 0;
        loop {
            let resp = self
                .transport
                .get(url, self.token.as_deref())
                .map_err(|e| MineError::HostUnreachable(e.0))?;
            match classify(&resp, url) {
                Ok(()) => {
                    if let Some(c) = &self.cache {
                        c.put(url, &resp.body)?;
                    }
                    return Ok(resp.body);
                }
                Err(MineError::RateLimited { retry_after }) if waits < self.config.max_rate_limit_waits => {
                    waits += 1;
                    let wait = retry_after.unwrap_or(Duration::from_secs(60));
                    tracing::warn!(url, "rate limited; waiting {}s", wait.as_secs());
                    (self.sleep)(wait);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Both scopes for every term, each paginated until exhausted or capped.
    pub fn search(&self, terms: &[SearchTerm]) -> Result<Vec<Candidate>, MineError> {
        let mut out = Vec::new();
        for term in terms {
            for scope in [Scope::Repositories, Scope::Code] {
                let mut seen = 0u64;
                for page in 1..=self.config.max_pages {
                    let url = self.url(term, scope, page);
                    let body = self.fetch(&url)?;
                    let json: Value = serde_json::from_str(&body).map_err(|e| MineError::Malformed {
                        url: url.clone(),
                        message: e.to_string(),
                    })?;
                    let items = json["items"].as_array().ok_or_else(|| MineError::Malformed {
                        url: url.clone(),
                        message: "missing items array".into(),
                    })?;
                    for item in items {
                        out.push(self.candidate(scope, term, item).ok_or_else(|| MineError::Malformed {
                            url: url.clone(),
                            message: "search item lacks repository fields".into(),
                        })?);
                    }
                    seen += items.len() as u64;
                    let total = json["total_count"].as_u64().unwrap_or(0);
                    if items.len() < self.config.per_page as usize || seen >= total {
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    fn candidate(&self, scope: Scope, term: &SearchTerm, item: &Value) -> Option<Candidate> {
        let evidence = format!("{} {}", term.id, term.quoted());
        match scope {
            Scope::Repositories => Some(Candidate {
                kind: CandidateKind::Repository,
                locator: Locator {
                    host: self.config.host.clone(),
                    owner: item["owner"]["login"].as_str()?.to_string(),
                    repo: item["name"].as_str()?.to_string(),
                    path: String::new(),
                    git_ref: item["default_branch"].as_str().unwrap_or_default().to_string(),
                },
                content_hash: String::new(),
                label: Label::Unlabelled,
                evidence,
            }),
            Scope::Code => {
                let repo = &item["repository"];
                let html = item["html_url"].as_str().unwrap_or_default();
                Some(Candidate {
                    kind: CandidateKind::CodeFile,
                    locator: Locator {
                        host: self.config.host.clone(),
                        owner: repo["owner"]["login"].as_str()?.to_string(),
                        repo: repo["name"].as_str()?.to_string(),
                        path: item["path"].as_str()?.to_string(),
                        git_ref: ref_from_html_url(html).unwrap_or("HEAD").to_string(),
                    },
                    content_hash: format!("git-blob:{}", item["sha"].as_str()?),
                    label: Label::Unlabelled,
                    evidence,
                })
            }
        }
    }
}

/// `https://github.com/o/r/blob/<ref>/path` -> `<ref>`.
fn ref_from_html_url(url: &str) -> Option<&str> {
    let (_, rest) = url.split_once("/blob/")?;
    rest.split('/').next().filter(|s| !s.is_empty())
}

fn header_secs(resp: &HttpResponse, name: &str) -> Option<u64> {
    resp.headers.get(name)?.trim().parse().ok()
}

fn classify(resp: &HttpResponse, url: &str) -> Result<(), MineError> {
    match resp.status {
        200..=299 => Ok(()),
        401 => Err(MineError::AuthError {
            status: 401,
            message: message_of(&resp.body),
        }),
        403 | 429 => {
            let exhausted = resp.headers.get("x-ratelimit-remaining").is_some_and(|v| v.trim() == "0");
            if let Some(s) = header_secs(resp, "retry-after") {
                return Err(MineError::RateLimited {
                    retry_after: Some(Duration::from_secs(s)),
                });
            }
            if exhausted || resp.status == 429 {
                let retry_after = header_secs(resp, "x-ratelimit-reset").map(|reset| {
                    let now = std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .map_or(0, |d| d.as_secs());
                    Duration::from_secs(reset.saturating_sub(now).max(1))
                });
                return Err(MineError::RateLimited { retry_after });
            }
            Err(MineError::AuthError {
                status: 403,
                message: message_of(&resp.body),
            })
        }
        status => Err(MineError::Http {
            status,
            url: url.to_string(),
        }),
    }
}

fn message_of(body: &str) -> String {
    serde_json::from_str::<Value>(body)
        .ok()
        .and_then(|v| v["message"].as_str().map(str::to_string))
        .unwrap_or_default()
}
