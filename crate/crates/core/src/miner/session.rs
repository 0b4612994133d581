//! Labelling sessions: a CSV table a human edits to record provenance labels.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Candidate, CandidateKind, Label, Locator};

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("session line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("session line {line}: content hash of {locator} changed since export")]
    HashMismatch { line: u64, locator: String },
    #[error("session line {line}: {locator} is not a known candidate")]
    UnknownCandidate { line: u64, locator: String },
    #[error("session I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    kind: String,
    host: String,
    owner: String,
    repo: String,
    path: String,
    #[serde(rename = "ref")]
    git_ref: String,
    content_hash: String,
    label: String,
    evidence: String,
}

fn label_str(l: Label) -> &'static str {
    match l {
        Label::Unlabelled => "unlabelled",
        Label::Included => "included",
        Label::Excluded => "excluded",
    }
}

pub fn export_session(w: impl Write, candidates: &[Candidate]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for c in candidates {
        out.serialize(Row {
            kind: c.kind.as_str().into(),
            host: c.locator.host.clone(),
            owner: c.locator.owner.clone(),
            repo: c.locator.repo.clone(),
            path: c.locator.path.clone(),
            git_ref: c.locator.git_ref.clone(),
            content_hash: c.content_hash.clone(),
            label: label_str(c.label).into(),
            evidence: c.evidence.clone(),
        })?;
    }
    if candidates.is_empty() {
        out.write_record(["kind", "host", "owner", "repo", "path", "ref", "content_hash", "label", "evidence"])?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a session file. `line` numbers count the header as line 1.
pub fn import_labels(r: impl Read) -> Result<Vec<(u64, Candidate)>, ImportError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize::<Row>() {
        let row = rec.map_err(|e| ImportError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = out.len() as u64 + 2;
        let bad = |message: String| ImportError::Row { line, message };
        let kind = match row.kind.as_str() {
            "repository" => CandidateKind::Repository,
            "code-file" => CandidateKind::CodeFile,
            other => return Err(bad(format!("unknown kind {other:?}"))),
        };
        let label = match row.label.trim() {
            "unlabelled" | "" => Label::Unlabelled,
            "included" => Label::Included,
            "excluded" => Label::Excluded,
            other => {
                return Err(bad(format!(
                    "unknown label {other:?} (expected unlabelled, included or excluded)"
                )))
            }
        };
        out.push((
            line,
            Candidate {
                kind,
                locator: Locator {
                    host: row.host,
                    owner: row.owner,
                    repo: row.repo,
                    path: row.path,
                    git_ref: row.git_ref,
                },
                content_hash: row.content_hash,
                label,
                evidence: row.evidence,
            },
        ));
    }
    Ok(out)
}

/// Copies labels and evidence from imported rows onto `candidates`.
/// Every row must name a known candidate with an unchanged content hash.
pub fn apply_labels(candidates: &[Candidate], rows: &[(u64, Candidate)]) -> Result<Vec<Candidate>, ImportError> {
    let index: HashMap<(CandidateKind, &Locator), usize> =
        candidates.iter().enumerate().map(|(i, c)| ((c.kind, &c.locator), i)).collect();
    let mut out = candidates.to_vec();
    for (line, row) in rows {
        let Some(&i) = index.get(&(row.kind, &row.locator)) else {
            return Err(ImportError::UnknownCandidate {
                line: *line,
                locator: row.locator.to_string(),
            });
        };
        if candidates[i].content_hash != row.content_hash {
            return Err(ImportError::HashMismatch {
                line: *line,
                locator: row.locator.to_string(),
            });
        }
        out[i].label = row.label;
        out[i].evidence = row.evidence.clone();
    }
    Ok(out)
}
