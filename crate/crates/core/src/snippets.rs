//! Reference snippets: whole-line source regions handed to the fix loop.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::SmellInstance;
use crate::smell::SmellType;
use crate::syntax::{enumerate_entities, CodeEntity, EntityKind, SourceUnit};

pub const DEFAULT_TOKEN_LIMIT: u32 = 4096;

#[derive(Debug, Error)]
pub enum SnippetError {
    #[error("{file}: span {first}-{last} lies outside a {lines}-line file")]
    SpanOutOfFile {
        file: PathBuf,
        first: usize,
        last: usize,
        lines: usize,
    },
    #[error("snippet manifest I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("snippet manifest line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineRange {
    pub first: usize,
    pub last: usize,
}

impl LineRange {
    pub fn contains_lines(&self, first: usize, last: usize) -> bool {
        self.first <= first && last <= self.last
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmellSnippet {
    pub snippet_id: String,
    pub file: PathBuf,
    pub line_range: LineRange,
    /// Complete physical lines with original indentation and terminators.
    pub text: String,
    pub instances: Vec<SmellInstance>,
    pub est_tokens: u32,
}

impl SmellSnippet {
    /// Distinct smell types in the snippet, each with its first instance.
    /// One fix attempt is made per target.
    pub fn targets(&self) -> Vec<&SmellInstance> {
        let mut seen = BTreeSet::new();
        let mut out: Vec<&SmellInstance> = self
            .instances
            .iter()
            .filter(|i| seen.insert(i.smell_type))
            .collect();
        out.sort_by_key(|i| i.smell_type);
        out
    }

    pub fn smell_types(&self) -> Vec<SmellType> {
        self.targets().into_iter().map(|i| i.smell_type).collect()
    }
}

pub fn snippet_id(file: &Path, range: LineRange) -> String {
    format!("{}#L{}-L{}", file.display(), range.first, range.last)
}

/// chars/4, rounded up.
pub fn estimate_tokens(text: &str) -> u32 {
    (text.chars().count() as u32).div_ceil(4)
}

/// Builds snippets for instances of one unit, sharing one entity walk.
pub struct SnippetBuilder<'u> {
    unit: &'u SourceUnit,
    entities: Vec<CodeEntity>,
}

impl<'u> SnippetBuilder<'u> {
    pub fn new(unit: &'u SourceUnit) -> Self {
        Self {
            unit,
            entities: enumerate_entities(unit),
        }
    }

    /// Lines the snippet for `instance` must cover.
    fn range_for(&self, instance: &SmellInstance) -> LineRange {
        let mut range = LineRange {
            first: instance.span.start_line,
            last: instance.span.end_line,
        };
        if instance.smell_type == SmellType::Lsc {
            // The isolated snippet must still show the nesting, so take the
            // outermost function enclosing the deep one.
            let outer = self
                .entities
                .iter()
                .filter(|e| matches!(e.kind, EntityKind::Function | EntityKind::Lambda))
                .filter(|e| e.span.contains(&instance.span))
                .min_by_key(|e| (e.span.start_line, e.span.start_col));
            if let Some(outer) = outer {
                range.first = range.first.min(outer.span.start_line);
                range.last = range.last.max(outer.span.end_line);
            }
        }
        range
    }

    pub fn build(&self, instance: &SmellInstance) -> Result<SmellSnippet, SnippetError> {
        let range = self.range_for(instance);
        let lines = self.unit.line_count();
        let text = match self.unit.lines_text(range.first, range.last) {
            Some(t) if range.first >= 1 && range.first <= range.last => t.to_string(),
            _ => {
                return Err(SnippetError::SpanOutOfFile {
                    file: instance.file.clone(),
                    first: range.first,
                    last: range.last,
                    lines,
                })
            }
        };
        Ok(SmellSnippet {
            snippet_id: snippet_id(&instance.file, range),
            file: instance.file.clone(),
            line_range: range,
            est_tokens: estimate_tokens(&text),
            text,
            instances: vec![instance.clone()],
        })
    }
}

pub fn build_snippet(instance: &SmellInstance, unit: &SourceUnit) -> Result<SmellSnippet, SnippetError> {
    SnippetBuilder::new(unit).build(instance)
}

/// Merge snippets with identical `(file, line_range)`; output sorted by that key.
pub fn consolidate(snippets: Vec<SmellSnippet>) -> Vec<SmellSnippet> {
    let mut merged: BTreeMap<(PathBuf, LineRange), SmellSnippet> = BTreeMap::new();
    for s in snippets {
        match merged.entry((s.file.clone(), s.line_range)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().instances.extend(s.instances);
            }
        }
    }
    merged
        .into_values()
        .map(|mut s| {
            s.instances.sort_by_key(SmellInstance::sort_key);
            s.instances.dedup();
            s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedSnippet {
    pub snippet: SmellSnippet,
    pub reason: String,
}

/// Split snippets by estimated size; `None` means no limit.
pub fn filter_token_limit(snippets: Vec<SmellSnippet>, limit: Option<u32>) -> (Vec<SmellSnippet>, Vec<DroppedSnippet>) {
    let Some(limit) = limit else {
        return (snippets, Vec::new());
    };
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for s in snippets {
        if s.est_tokens > limit {
            let reason = format!("estimated {} tokens exceeds limit {}", s.est_tokens, limit);
            dropped.push(DroppedSnippet { snippet: s, reason });
        } else {
            kept.push(s);
        }
    }
    (kept, dropped)
}

/// Cardinalities along the snippet pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SnippetCounts {
    pub instances: usize,
    /// Distinct (snippet, smell type) targets.
    pub smells: usize,
    pub snippets: usize,
}

impl SnippetCounts {
    pub fn of(snippets: &[SmellSnippet]) -> Self {
        Self {
            instances: snippets.iter().map(|s| s.instances.len()).sum(),
            smells: snippets.iter().map(|s| s.targets().len()).sum(),
            snippets: snippets.len(),
        }
    }
}

/// One line of the snippet manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetRecord {
    pub id: String,
    pub file: PathBuf,
    pub first_line: usize,
    pub last_line: usize,
    pub smell_types: Vec<SmellType>,
    pub est_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped: Option<String>,
    pub instances: Vec<SmellInstance>,
    pub text: String,
}

impl SnippetRecord {
    pub fn new(s: &SmellSnippet, dropped: Option<String>) -> Self {
        Self {
            id: s.snippet_id.clone(),
            file: s.file.clone(),
            first_line: s.line_range.first,
            last_line: s.line_range.last,
            smell_types: s.smell_types(),
            est_tokens: s.est_tokens,
            dropped,
            instances: s.instances.clone(),
            text: s.text.clone(),
        }
    }

    pub fn into_snippet(self) -> SmellSnippet {
        SmellSnippet {
            snippet_id: self.id,
            file: self.file,
            line_range: LineRange {
                first: self.first_line,
                last: self.last_line,
            },
            text: self.text,
            instances: self.instances,
            est_tokens: self.est_tokens,
        }
    }
}

pub fn write_manifest(w: &mut impl Write, kept: &[SmellSnippet], dropped: &[DroppedSnippet]) -> Result<(), SnippetError> {
    let mut records: Vec<SnippetRecord> = kept.iter().map(|s| SnippetRecord::new(s, None)).collect();
    records.extend(
        dropped
            .iter()
            .map(|d| SnippetRecord::new(&d.snippet, Some(d.reason.clone()))),
    );
    records.sort_by(|a, b| (&a.file, a.first_line, a.last_line).cmp(&(&b.file, b.first_line, b.last_line)));
    for r in records {
        serde_json::to_writer(&mut *w, &r).map_err(|source| SnippetError::Record { line: 0, source })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_manifest(r: impl BufRead) -> Result<Vec<SnippetRecord>, SnippetError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| SnippetError::Record { line: i + 1, source })?);
    }
    Ok(out)
}
