//! Threshold-based smell detection over single units and whole corpora.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{Measurer, MetricVector};
use crate::profile::ThresholdProfile;
use crate::rate::Percent;
use crate::smell::SmellType;
use crate::syntax::{enumerate_entities, parse_source, CodeEntity, EntityKind, SourceUnit, Span};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SmellInstance {
    pub smell_type: SmellType,
    pub file: PathBuf,
    pub start_line: usize,
    pub span: Span,
    pub metric_value: u32,
    pub threshold: u32,
    pub entity_kind: EntityKind,
    /// The entity sits directly in a class body; verification re-wraps the
    /// snippet in a class so receiver handling matches detection.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub in_class_body: bool,
}

impl SmellInstance {
    pub fn sort_key(&self) -> (usize, SmellType, Span) {
        (self.start_line, self.smell_type, self.span)
    }
}

/// Entities, metric vectors and instances of one unit under one profile.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub entities: Vec<CodeEntity>,
    pub vectors: Vec<MetricVector>,
    pub instances: Vec<SmellInstance>,
}

pub fn analyze(unit: &SourceUnit, profile: &ThresholdProfile) -> Analysis {
    let entities = enumerate_entities(unit);
    let vectors = Measurer::new(unit, &entities, profile.options)
        .measure_all()
        .expect("entities were enumerated from this unit");
    let mut instances: Vec<SmellInstance> = vectors
        .iter()
        .filter(|v| profile.exceeds(v.metric_id, v.value))
        .map(|v| {
            let e = &entities[v.entity];
            SmellInstance {
                smell_type: v.metric_id.smell(),
                file: unit.path.clone(),
                start_line: e.span.start_line,
                span: e.span,
                metric_value: v.value,
                threshold: profile.threshold(v.metric_id),
                entity_kind: e.kind,
                in_class_body: e.in_class_body,
            }
        })
        .collect();
    instances.sort_by_key(SmellInstance::sort_key);
    Analysis {
        entities,
        vectors,
        instances,
    }
}

/// Instances sorted by `(start_line, smell_type)`.
pub fn detect(unit: &SourceUnit, profile: &ThresholdProfile) -> Vec<SmellInstance> {
    analyze(unit, profile).instances
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRef {
    pub name: String,
    pub hash: String,
}

impl From<&ThresholdProfile> for ProfileRef {
    fn from(p: &ThresholdProfile) -> Self {
        Self {
            name: p.name.clone(),
            hash: p.hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: PathBuf,
    pub instances: Vec<SmellInstance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub path: PathBuf,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub profile: ProfileRef,
    pub files_scanned: usize,
    pub files_smelly: usize,
    pub files: Vec<FileReport>,
    pub parse_failures: Vec<ParseFailure>,
    pub counts: BTreeMap<SmellType, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DistributionRow {
    pub smell: SmellType,
    pub count: usize,
    pub percent: Option<Percent>,
}

/// Rows for every smell with a nonzero count, most frequent first.
pub fn distribution(counts: &BTreeMap<SmellType, usize>) -> Vec<DistributionRow> {
    let total: usize = counts.values().sum();
    let mut rows: Vec<DistributionRow> = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&smell, &count)| DistributionRow {
            smell,
            count,
            percent: Percent::of(count as u64, total as u64),
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then(a.smell.cmp(&b.smell)));
    rows
}

impl CorpusReport {
    pub fn empty(profile: &ThresholdProfile) -> Self {
        Self::from_files(profile, Vec::new(), Vec::new())
    }

    pub fn from_files(profile: &ThresholdProfile, mut files: Vec<FileReport>, mut parse_failures: Vec<ParseFailure>) -> Self {
        files.sort_by(|a, b| a.path.cmp(&b.path));
        parse_failures.sort_by(|a, b| a.path.cmp(&b.path));
        let mut counts: BTreeMap<SmellType, usize> = SmellType::ALL.into_iter().map(|t| (t, 0)).collect();
        for inst in files.iter().flat_map(|f| &f.instances) {
            *counts.entry(inst.smell_type).or_default() += 1;
        }
        Self {
            profile: profile.into(),
            files_scanned: files.len(),
            files_smelly: files.iter().filter(|f| !f.instances.is_empty()).count(),
            files,
            parse_failures,
            counts,
        }
    }

    pub fn total_instances(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn distribution(&self) -> Vec<DistributionRow> {
        distribution(&self.counts)
    }

    pub fn smelly_ratio(&self) -> Option<Percent> {
        Percent::of(self.files_smelly as u64, self.files_scanned as u64)
    }

    pub fn instances(&self) -> impl Iterator<Item = &SmellInstance> {
        self.files.iter().flat_map(|f| &f.instances)
    }
}

enum Outcome {
    Scanned(FileReport),
    Failed(ParseFailure),
}

fn scan_file(path: &Path, profile: &ThresholdProfile) -> Outcome {
    let fail = |line, col, message: String| {
        Outcome::Failed(ParseFailure {
            path: path.to_path_buf(),
            line,
            col,
            message,
        })
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return fail(0, 0, format!("read error: {e}")),
    };
    let text = match String::from_utf8(bytes) {
        Ok(t) => t,
        Err(_) => return fail(0, 0, "file is not valid UTF-8".into()),
    };
    match parse_source(path, text) {
        Ok(unit) => Outcome::Scanned(FileReport {
            path: path.to_path_buf(),
            instances: detect(&unit, profile),
        }),
        Err(e) => {
            tracing::warn!(path = %path.display(), line = e.line, col = e.col, "skipping unparseable file: {}", e.message);
            fail(e.line, e.col, e.message)
        }
    }
}

/// Detect over many files; files that do not parse are listed, not fatal.
pub fn detect_corpus(paths: &[PathBuf], profile: &ThresholdProfile) -> CorpusReport {
    let mut sorted = paths.to_vec();
    sorted.sort();
    sorted.dedup();
    let outcomes: Vec<Outcome> = sorted.par_iter().map(|p| scan_file(p, profile)).collect();
    let mut files = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Scanned(f) => files.push(f),
            Outcome::Failed(f) => failures.push(f),
        }
    }
    CorpusReport::from_files(profile, files, failures)
}
