//! Run manifests tie a fix run's outputs to the inputs that produced them.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fixloop::{BackendDescriptor, PromptTier};
use crate::detector::ProfileRef;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// A file named by path as given plus the SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

impl FileRef {
    pub fn new(path: impl Into<String>, bytes: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool_version: String,
    pub profile: ProfileRef,
    pub snippet_manifest: FileRef,
    pub backend: BackendDescriptor,
    pub backend_config_hash: String,
    pub tiers: Vec<PromptTier>,
    pub token_limit: Option<u32>,
    pub attempts_store: String,
    pub attempts: usize,
    pub errored_attempts: usize,
    pub started_at: String,
    pub finished_at: String,
}

/// Digest of everything that determines a run's inputs, shortened to 16 hex
/// digits.
pub fn run_id(profile: &ProfileRef, snippets: &FileRef, backend: &BackendDescriptor, tiers: &[PromptTier]) -> String {
    let key = serde_json::json!({
        "profile": profile.hash,
        "snippets": snippets.sha256,
        "backend": backend.config_hash(),
        "tiers": tiers,
    });
    let digest = hex::encode(Sha256::digest(key.to_string().as_bytes()));
    digest[..16].to_string()
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
