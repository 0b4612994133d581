use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use smellfix_core::evaluator::{fixing_rates, verdict};
use smellfix_core::fixloop::runner::read_attempts;
use smellfix_core::manifest::RunManifest;
use smellfix_core::report::{emit_report, Report, ReportFormat, ReportSource};

use crate::detect::read_corpus_report;
use crate::{write_file, Classify, CmdResult, Ctx, Failure, Outcome};

#[derive(clap::Args)]
pub struct ReportArgs {
    /// Run manifest written by `fix`.
    #[arg(long)]
    run: PathBuf,
    /// Corpus report from `detect`, for the distribution table.
    #[arg(long)]
    detection: Option<PathBuf>,
    /// Defaults to `report` next to the run manifest.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated: json, csv, text.
    #[arg(long, default_value = "json,csv,text")]
    formats: String,
}

fn formats(s: &str) -> Result<Vec<ReportFormat>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<ReportFormat>().map_err(|_| Failure::Config(anyhow!("unknown report format {p:?}"))))
        .collect()
}

pub fn run(ctx: &Ctx, args: ReportArgs) -> CmdResult {
    let formats = formats(&args.formats)?;
    let profile = ctx.profile()?;
    let text = std::fs::read_to_string(&args.run)
        .map_err(|e| Failure::Config(anyhow!("cannot read run manifest {}: {e}", args.run.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(anyhow!("invalid run manifest {}: {e}", args.run.display())))?;
    if manifest.profile.hash != profile.hash() {
        return Err(Failure::Config(anyhow!(
            "profile {} differs from the profile {} the run was made with",
            profile.name,
            manifest.profile.name
        )));
    }
    let run_dir = args.run.parent().unwrap_or(Path::new(""));
    let store = run_dir.join(&manifest.attempts_store);
    let f = File::open(&store).map_err(|e| Failure::Runtime(anyhow!("cannot open {}: {e}", store.display())))?;
    let attempts = read_attempts(BufReader::new(f)).runtime_err()?;

    let verdicts: Vec<_> = attempts.iter().map(|a| verdict(a, &profile)).collect();
    let table = fixing_rates(&verdicts);
    let source = ReportSource {
        manifest: args.run.display().to_string(),
        run_id: manifest.run_id.clone(),
    };
    let out_dir = args.out_dir.unwrap_or_else(|| run_dir.join("report"));
    let mut lines = String::new();
    for v in &verdicts {
        lines.push_str(&serde_json::to_string(v).runtime_err()?);
        lines.push('\n');
    }
    write_file(&out_dir.join("verdicts.jsonl"), &lines)?;
    for &fmt in &formats {
        let doc = emit_report(Report::Rates(&table), Some(&source), fmt);
        write_file(&out_dir.join(format!("fixing-rates.{}", fmt.extension())), &doc)?;
    }
    if let Some(path) = &args.detection {
        let report = read_corpus_report(path)?;
        if report.profile.hash != manifest.profile.hash {
            return Err(Failure::Config(anyhow!(
                "{} was detected with a different profile than the run",
                path.display()
            )));
        }
        for &fmt in &formats {
            let doc = emit_report(Report::Distribution(&report), Some(&source), fmt);
            write_file(&out_dir.join(format!("distribution.{}", fmt.extension())), &doc)?;
        }
    }
    print!("{}", emit_report(Report::Rates(&table), Some(&source), ReportFormat::Text));
    Ok(Outcome::Success)
}
