//! Structured and tabular renderings of distribution and fixing-rate tables.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detector::{CorpusReport, ProfileRef};
use crate::evaluator::{Cell, FixingRateTable};
use crate::fixloop::PromptTier;
use crate::rate::{render, Percent};
use crate::smell::{SmellType, UnknownName};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" | "txt" => Ok(ReportFormat::Text),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Text => "txt",
        }
    }
}

/// The run manifest a report was produced from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSource {
    pub manifest: String,
    pub run_id: String,
}

pub enum Report<'a> {
    Distribution(&'a CorpusReport),
    Rates(&'a FixingRateTable),
}

pub fn emit_report(report: Report<'_>, source: Option<&ReportSource>, format: ReportFormat) -> String {
    match (report, format) {
        (Report::Distribution(r), ReportFormat::Json) => json(&DistributionDoc::new(r, source)),
        (Report::Distribution(r), ReportFormat::Csv) => distribution_csv(r),
        (Report::Distribution(r), ReportFormat::Text) => distribution_text(r, source),
        (Report::Rates(t), ReportFormat::Json) => json(&RatesDoc::new(t, source)),
        (Report::Rates(t), ReportFormat::Csv) => rates_csv(t),
        (Report::Rates(t), ReportFormat::Text) => rates_text(t, source),
    }
}

fn json(doc: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct DistributionRowDoc {
    smell: SmellType,
    count: usize,
    percent: Option<Percent>,
}

#[derive(Serialize)]
struct DistributionDoc<'a> {
    kind: &'static str,
    source: Option<&'a ReportSource>,
    profile: &'a ProfileRef,
    files_scanned: usize,
    files_smelly: usize,
    smelly_ratio: Option<Percent>,
    parse_failures: usize,
    total_instances: usize,
    rows: Vec<DistributionRowDoc>,
}

impl<'a> DistributionDoc<'a> {
    fn new(r: &'a CorpusReport, source: Option<&'a ReportSource>) -> Self {
        Self {
            kind: "smell-distribution",
            source,
            profile: &r.profile,
            files_scanned: r.files_scanned,
            files_smelly: r.files_smelly,
            smelly_ratio: r.smelly_ratio(),
            parse_failures: r.parse_failures.len(),
            total_instances: r.total_instances(),
            rows: r
                .distribution()
                .into_iter()
                .map(|row| DistributionRowDoc {
                    smell: row.smell,
                    count: row.count,
                    percent: row.percent,
                })
                .collect(),
        }
    }
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

fn number(p: Option<Percent>) -> String {
    p.map_or_else(String::new, Percent::number)
}

fn distribution_csv(r: &CorpusReport) -> String {
    let mut rows = vec![vec!["smell".to_string(), "count".into(), "percent".into()]];
    for row in r.distribution() {
        rows.push(vec![row.smell.to_string(), row.count.to_string(), number(row.percent)]);
    }
    csv_string(rows)
}

/// Left-aligned first column, right-aligned rest, two-space gutters.
fn grid(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn source_line(out: &mut String, source: Option<&ReportSource>) {
    if let Some(s) = source {
        let _ = writeln!(out, "Run {} ({})", s.run_id, s.manifest);
    }
}

fn distribution_text(r: &CorpusReport, source: Option<&ReportSource>) -> String {
    let mut out = String::new();
    source_line(&mut out, source);
    let _ = writeln!(out, "Profile {} ({})", r.profile.name, &r.profile.hash[..12.min(r.profile.hash.len())]);
    let mut rows = vec![vec!["Smell".to_string(), "Count".into(), "Percent".into()]];
    for row in r.distribution() {
        rows.push(vec![row.smell.to_string(), row.count.to_string(), render(row.percent)]);
    }
    rows.push(vec!["Total".into(), r.total_instances().to_string(), String::new()]);
    out.push_str(&grid(&rows));
    let _ = writeln!(
        out,
        "Smelly files: {} of {} ({})",
        r.files_smelly,
        r.files_scanned,
        render(r.smelly_ratio())
    );
    if !r.parse_failures.is_empty() {
        let _ = writeln!(out, "Unparseable files skipped: {}", r.parse_failures.len());
    }
    out
}

#[derive(Serialize)]
struct CellDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    smell: Option<SmellType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tier: Option<PromptTier>,
    fixed: usize,
    total: usize,
    rate: Option<Percent>,
}

impl CellDoc {
    fn new(smell: Option<SmellType>, tier: Option<PromptTier>, c: &Cell) -> Self {
        Self {
            smell,
            tier,
            fixed: c.fixed,
            total: c.total,
            rate: c.rate(),
        }
    }
}

#[derive(Serialize)]
struct RatesDoc<'a> {
    kind: &'static str,
    source: Option<&'a ReportSource>,
    tiers: Vec<PromptTier>,
    cells: Vec<CellDoc>,
    tier_averages: Vec<CellDoc>,
    type_averages: Vec<CellDoc>,
    overall: CellDoc,
}

impl<'a> RatesDoc<'a> {
    fn new(t: &FixingRateTable, source: Option<&'a ReportSource>) -> Self {
        Self {
            kind: "fixing-rates",
            source,
            tiers: t.tiers(),
            cells: t.cells.iter().map(|(&(s, tier), c)| CellDoc::new(Some(s), Some(tier), c)).collect(),
            tier_averages: t.tier_averages.iter().map(|(&tier, c)| CellDoc::new(None, Some(tier), c)).collect(),
            type_averages: t.type_averages.iter().map(|(&s, c)| CellDoc::new(Some(s), None, c)).collect(),
            overall: CellDoc::new(None, None, &t.overall),
        }
    }
}

fn rates_csv(t: &FixingRateTable) -> String {
    let mut rows = vec![vec!["smell".to_string(), "tier".into(), "fixed".into(), "total".into(), "rate".into()]];
    let mut push = |smell: String, tier: String, c: &Cell| {
        rows.push(vec![smell, tier, c.fixed.to_string(), c.total.to_string(), number(c.rate())]);
    };
    for (&(s, tier), c) in &t.cells {
        push(s.to_string(), tier.to_string(), c);
    }
    for (&s, c) in &t.type_averages {
        push(s.to_string(), "average".into(), c);
    }
    for (&tier, c) in &t.tier_averages {
        push("average".into(), tier.to_string(), c);
    }
    push("average".into(), "average".into(), &t.overall);
    csv_string(rows)
}

fn tier_heading(t: PromptTier) -> &'static str {
    match t {
        PromptTier::General => "General",
        PromptTier::CodeSmell => "Code smell",
        PromptTier::Specific => "Specific",
    }
}

fn cell_text(c: Option<&Cell>) -> String {
    match c {
        Some(c) => format!("{} ({}/{})", render(c.rate()), c.fixed, c.total),
        None => "-".into(),
    }
}

fn rates_text(t: &FixingRateTable, source: Option<&ReportSource>) -> String {
    let mut out = String::new();
    source_line(&mut out, source);
    let tiers = t.tiers();
    let mut head = vec!["Smell".to_string()];
    head.extend(tiers.iter().map(|&x| tier_heading(x).to_string()));
    head.push("Average".into());
    let mut rows = vec![head];
    for s in t.smell_types() {
        let mut row = vec![s.to_string()];
        row.extend(tiers.iter().map(|&tier| cell_text(t.cell(s, tier))));
        row.push(cell_text(t.type_averages.get(&s)));
        rows.push(row);
    }
    let mut avg = vec!["Average".to_string()];
    avg.extend(tiers.iter().map(|tier| cell_text(t.tier_averages.get(tier))));
    avg.push(cell_text(Some(&t.overall)));
    rows.push(avg);
    out.push_str(&grid(&rows));
    out
}
