//! Keyword mining of candidate files and repositories for human labelling.

pub mod search;
pub mod session;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use search::{HostConfig, HttpResponse, MineError, Miner, PageCache, ReqwestTransport, Transport, TransportError};
pub use session::{apply_labels, export_session, import_labels, ImportError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTerm {
    pub id: String,
    pub phrase: String,
}

impl SearchTerm {
    pub fn new(id: impl Into<String>, phrase: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            phrase: phrase.into(),
        }
    }

    /// The phrase in double quotes, as sent to the search API.
    pub fn quoted(&self) -> String {
        format!("\"{}\"", self.phrase)
    }
}

pub fn default_terms() -> Vec<SearchTerm> {
    vec![
        SearchTerm::new("ST1", "by GitHub Copilot"),
        SearchTerm::new("ST2", "use GitHub Copilot"),
        SearchTerm::new("ST3", "with GitHub Copilot"),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    Repository,
    CodeFile,
}

impl CandidateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateKind::Repository => "repository",
            CandidateKind::CodeFile => "code-file",
        }
    }
}

/// Where a candidate lives. Repositories have an empty `path`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Locator {
    pub host: String,
    pub owner: String,
    pub repo: String,
    pub path: String,
    #[serde(rename = "ref")]
    pub git_ref: String,
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.host, self.owner, self.repo)?;
        if !self.path.is_empty() {
            write!(f, "/{}", self.path)?;
        }
        if !self.git_ref.is_empty() {
            write!(f, "@{}", self.git_ref)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    #[default]
    Unlabelled,
    Included,
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub locator: Locator,
    /// Dedup key for code files: `git-blob:<sha1>` from the host, or
    /// `sha256:<hex>` for local text. Empty for repositories.
    pub content_hash: String,
    pub label: Label,
    pub evidence: String,
}

pub fn content_hash(text: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(text)))
}

fn merge_evidence(a: &str, b: &str) -> String {
    let mut parts: Vec<&str> = a.split("; ").chain(b.split("; ")).filter(|p| !p.is_empty()).collect();
    parts.sort();
    parts.dedup();
    parts.join("; ")
}

/// Code files collapse by content hash, repositories by locator. The
/// survivor of a group is its smallest locator; evidence is unioned.
/// Output is sorted by (kind, locator).
pub fn dedup(candidates: Vec<Candidate>) -> Vec<Candidate> {
    let mut groups: BTreeMap<(CandidateKind, String), Candidate> = BTreeMap::new();
    for c in candidates {
        let key = match c.kind {
            CandidateKind::CodeFile if !c.content_hash.is_empty() => c.content_hash.clone(),
            _ => c.locator.to_string(),
        };
        match groups.entry((c.kind, key)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let kept = o.get_mut();
                let evidence = merge_evidence(&kept.evidence, &c.evidence);
                if c.locator < kept.locator {
                    *kept = c;
                }
                kept.evidence = evidence;
            }
        }
    }
    let mut out: Vec<Candidate> = groups.into_values().collect();
    out.sort_by(|a, b| (a.kind, &a.locator).cmp(&(b.kind, &b.locator)));
    out
}

/// Code-file candidates for every `.py` file under `dir`, hashed in parallel.
pub fn candidates_from_dir(dir: &Path) -> std::io::Result<Vec<Candidate>> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "py") {
            files.push(entry.into_path());
        }
    }
    let hashed: Vec<std::io::Result<Candidate>> = files
        .par_iter()
        .map(|p| {
            let bytes = std::fs::read(p)?;
            let rel = p.strip_prefix(dir).unwrap_or(p);
            Ok(Candidate {
                kind: CandidateKind::CodeFile,
                locator: Locator {
                    host: "local".into(),
                    owner: String::new(),
                    repo: dir.display().to_string(),
                    path: rel.to_string_lossy().replace('\\', "/"),
                    git_ref: String::new(),
                },
                content_hash: content_hash(&bytes),
                label: Label::Unlabelled,
                evidence: String::new(),
            })
        })
        .collect();
    hashed.into_iter().collect()
}
