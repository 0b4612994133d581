//! Fixed/Unfixed verdicts by re-detection, and fixing-rate aggregation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::detector::{detect, SmellInstance};
use crate::fixloop::{FixAttempt, PromptTier};
use crate::profile::ThresholdProfile;
use crate::rate::Percent;
use crate::smell::SmellType;
use crate::syntax::{parse_source, EntityKind, SourceUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fixed,
    Unfixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictReason {
    SmellAbsent,
    SmellPersists,
    UnparseableOutput,
    NoCodeExtracted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixVerdict {
    /// `seq` of the judged attempt.
    pub attempt: usize,
    pub snippet_id: String,
    pub smell_type: SmellType,
    pub tier: PromptTier,
    pub verdict: Verdict,
    pub reason: VerdictReason,
    /// Largest remaining metric value of the target type.
    pub residual_metric: Option<u32>,
    /// Types found in the output that the snippet was not selected for.
    pub new_smells: Vec<SmellType>,
}

const WRAPPER: &str = "class _SnippetWrapper:\n";

/// A refactoring re-parsed on its own, with the wrapper class (if any)
/// remembered so its own measurements can be ignored.
pub struct Reparsed {
    pub unit: SourceUnit,
    pub class_wrapped: bool,
}

fn indent_all(code: &str, prefix: &str) -> String {
    code.lines()
        .map(|l| if l.trim().is_empty() { "\n".to_string() } else { format!("{prefix}{l}\n") })
        .collect()
}

/// Dedents `code`; members of a class body are re-wrapped in a class.
pub fn reparse(code: &str, in_class_body: bool) -> Option<Reparsed> {
    let mut text = textwrap::dedent(code).trim_end_matches(['\n', '\r']).to_string();
    text.push('\n');
    if in_class_body {
        text = format!("{WRAPPER}{}", indent_all(&text, "    "));
    }
    let unit = parse_source("refactored.py", text).ok()?;
    Some(Reparsed {
        unit,
        class_wrapped: in_class_body,
    })
}

/// Instances in `code` as it would be judged, wrapper excluded.
pub fn redetect(code: &str, in_class_body: bool, profile: &ThresholdProfile) -> Option<Vec<SmellInstance>> {
    let r = reparse(code, in_class_body)?;
    let mut found = detect(&r.unit, profile);
    if r.class_wrapped {
        found.retain(|i| !(i.start_line == 1 && i.entity_kind == EntityKind::Class));
    }
    Some(found)
}

pub fn verdict(attempt: &FixAttempt, profile: &ThresholdProfile) -> FixVerdict {
    let target = attempt.target_smell.smell_type;
    let mut v = FixVerdict {
        attempt: attempt.seq,
        snippet_id: attempt.snippet_id.clone(),
        smell_type: target,
        tier: attempt.tier,
        verdict: Verdict::Unfixed,
        reason: VerdictReason::NoCodeExtracted,
        residual_metric: None,
        new_smells: Vec::new(),
    };
    let Some(code) = &attempt.extracted_code else {
        return v;
    };
    let Some(found) = redetect(code, attempt.target_smell.in_class_body, profile) else {
        v.reason = VerdictReason::UnparseableOutput;
        return v;
    };
    v.residual_metric = found.iter().filter(|i| i.smell_type == target).map(|i| i.metric_value).max();
    let (verdict, reason) = match v.residual_metric {
        None => (Verdict::Fixed, VerdictReason::SmellAbsent),
        Some(_) => (Verdict::Unfixed, VerdictReason::SmellPersists),
    };
    v.verdict = verdict;
    v.reason = reason;
    let types: BTreeSet<SmellType> = found.iter().map(|i| i.smell_type).collect();
    v.new_smells = types
        .into_iter()
        .filter(|t| *t != target && !attempt.snippet_smells.contains(t))
        .collect();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub fixed: usize,
    pub total: usize,
}

impl Cell {
    pub fn rate(&self) -> Option<Percent> {
        Percent::of(self.fixed as u64, self.total as u64)
    }

    fn add(&mut self, fixed: bool) {
        self.total += 1;
        self.fixed += usize::from(fixed);
    }
}

/// Fixed/total counts per (type, tier), with instance-pooled averages.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FixingRateTable {
    pub cells: BTreeMap<(SmellType, PromptTier), Cell>,
    pub tier_averages: BTreeMap<PromptTier, Cell>,
    pub type_averages: BTreeMap<SmellType, Cell>,
    pub overall: Cell,
}

impl FixingRateTable {
    pub fn tiers(&self) -> Vec<PromptTier> {
        self.tier_averages.keys().copied().collect()
    }

    pub fn smell_types(&self) -> Vec<SmellType> {
        self.type_averages.keys().copied().collect()
    }

    pub fn cell(&self, smell: SmellType, tier: PromptTier) -> Option<&Cell> {
        self.cells.get(&(smell, tier))
    }
}

pub fn fixing_rates<'a>(verdicts: impl IntoIterator<Item = &'a FixVerdict>) -> FixingRateTable {
    let mut t = FixingRateTable::default();
    for v in verdicts {
        let fixed = v.verdict == Verdict::Fixed;
        t.cells.entry((v.smell_type, v.tier)).or_default().add(fixed);
        t.tier_averages.entry(v.tier).or_default().add(fixed);
        t.type_averages.entry(v.smell_type).or_default().add(fixed);
        t.overall.add(fixed);
    }
    t
}
