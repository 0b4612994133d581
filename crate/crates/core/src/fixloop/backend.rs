//! Chat backends: the request shape, the error taxonomy and the two
//! deterministic stand-ins.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompt::PromptTier;
use crate::smell::SmellType;

/// One chat turn: instruction plus the snippet it applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatRequest {
    pub snippet_id: String,
    pub tier: PromptTier,
    pub target: SmellType,
    pub prompt_text: String,
    pub snippet_text: String,
}

impl ChatRequest {
    /// The single user message: prompt, blank line, fenced snippet.
    pub fn user_message(&self) -> String {
        let mut msg = format!("{}\n\n```python\n{}", self.prompt_text, self.snippet_text);
        if !self.snippet_text.ends_with('\n') {
            msg.push('\n');
        }
        msg.push_str("```");
        msg
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("rate limited{}", retry_after.map(|d| format!(" (retry after {}s)", d.as_secs_f64())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("no recorded response for {0}")]
    MissingRecord(String),
    #[error("request rejected: {0}")]
    Rejected(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Unavailable(_) | BackendError::RateLimited { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    HttpChat,
    Replay,
    ScriptedMock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub backend_id: String,
    pub kind: BackendKind,
    /// Endpoint and knobs; for file-backed kinds, a digest of the file.
    pub config: BTreeMap<String, String>,
}

impl BackendDescriptor {
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("descriptor serializes");
        hex::encode(Sha256::digest(&json))
    }
}

pub trait Backend: Send + Sync {
    fn descriptor(&self) -> &BackendDescriptor;
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError>;
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

fn read_file(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MockAction {
    /// Return the snippet unchanged in a fence.
    #[default]
    Echo,
    /// Return a fenced `pass`, which carries no smell.
    Stub,
    /// Return prose with no code.
    Prose,
    /// Return the rule's `response` verbatim.
    Respond,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    pub snippet: Option<String>,
    pub tier: Option<PromptTier>,
    pub smell: Option<SmellType>,
    pub action: MockAction,
    pub response: Option<String>,
}

impl MockRule {
    fn matches(&self, req: &ChatRequest) -> bool {
        self.snippet.as_ref().is_none_or(|s| *s == req.snippet_id)
            && self.tier.is_none_or(|t| t == req.tier)
            && self.smell.is_none_or(|s| s == req.target)
    }
}

/// Rules are tried in order; the first match decides the response.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub default: MockAction,
    #[serde(default, rename = "rule")]
    pub rules: Vec<MockRule>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

pub struct ScriptedMock {
    descriptor: BackendDescriptor,
    scenario: Scenario,
}

impl ScriptedMock {
    pub fn new(id: impl Into<String>, scenario: Scenario) -> Self {
        let mut config = BTreeMap::new();
        config.insert("scenario_sha256".to_string(), digest(scenario.to_toml().as_bytes()));
        Self {
            descriptor: BackendDescriptor {
                backend_id: id.into(),
                kind: BackendKind::ScriptedMock,
                config,
            },
            scenario,
        }
    }

    /// Every request is echoed back.
    pub fn echo() -> Self {
        Self::new("echo", Scenario::default())
    }

    pub fn load(id: impl Into<String>, path: &Path) -> Result<Self, LoadError> {
        let text = read_file(path)?;
        let scenario = Scenario::from_toml(&text).map_err(|e| LoadError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(Self::new(id, scenario))
    }
}

fn fenced(code: &str) -> String {
    let mut out = String::from("```python\n");
    out.push_str(code);
    if !code.ends_with('\n') {
        out.push('\n');
    }
    out.push_str("```\n");
    out
}

impl Backend for ScriptedMock {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let rule = self.scenario.rules.iter().find(|r| r.matches(req));
        let action = rule.map_or(self.scenario.default, |r| r.action);
        Ok(match action {
            MockAction::Echo => fenced(&req.snippet_text),
            MockAction::Stub => fenced("pass\n"),
            MockAction::Prose => "The selected code looks fine as it is.\n".to_string(),
            MockAction::Respond => rule.and_then(|r| r.response.clone()).unwrap_or_default(),
        })
    }
}

/// One recorded response. `smell` disambiguates snippets carrying two
/// smell types; records without it answer for every target of the snippet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub snippet_id: String,
    pub tier: PromptTier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smell: Option<SmellType>,
    pub response: String,
}

type ReplayKey = (String, PromptTier, Option<SmellType>);

pub struct Replay {
    descriptor: BackendDescriptor,
    records: HashMap<ReplayKey, String>,
}

impl Replay {
    pub fn new(id: impl Into<String>, records: Vec<TranscriptRecord>, transcript_sha256: String) -> Self {
        let mut map = HashMap::new();
        for r in records {
            // the first record for a key wins
            map.entry((r.snippet_id, r.tier, r.smell)).or_insert(r.response);
        }
        let mut config = BTreeMap::new();
        config.insert("transcript_sha256".to_string(), transcript_sha256);
        Self {
            descriptor: BackendDescriptor {
                backend_id: id.into(),
                kind: BackendKind::Replay,
                config,
            },
            records: map,
        }
    }

    pub fn parse(id: impl Into<String>, text: &str) -> Result<Self, (usize, serde_json::Error)> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(line).map_err(|e| (i + 1, e))?);
        }
        Ok(Self::new(id, records, digest(text.as_bytes())))
    }

    pub fn load(id: impl Into<String>, path: &Path) -> Result<Self, LoadError> {
        let text = read_file(path)?;
        Self::parse(id, &text).map_err(|(line, e)| LoadError::Format {
            path: path.display().to_string(),
            message: format!("line {line}: {e}"),
        })
    }
}

impl Backend for Replay {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let exact = (req.snippet_id.clone(), req.tier, Some(req.target));
        let any = (req.snippet_id.clone(), req.tier, None);
        self.records
            .get(&exact)
            .or_else(|| self.records.get(&any))
            .cloned()
            .ok_or_else(|| BackendError::MissingRecord(format!("{} [{}, {}]", req.snippet_id, req.tier, req.target)))
    }
}

/// Reads transcript records, e.g. to merge several files.
pub fn read_transcript(r: impl BufRead) -> Result<Vec<TranscriptRecord>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| (i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| (i + 1, e.to_string()))?);
    }
    Ok(out)
}
