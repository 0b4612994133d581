use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::anyhow;
use smellfix_core::report::{emit_report, Report, ReportFormat};
use smellfix_core::snippets::{consolidate, filter_token_limit, write_manifest, SnippetBuilder, SnippetCounts};
use smellfix_core::{detect_corpus, parse_source, CorpusReport};

use crate::{write_file, Classify, CmdResult, Ctx, Failure, Outcome};

#[derive(clap::Args)]
pub struct DetectArgs {
    /// Python files or directories to scan.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Corpus report (JSON).
    #[arg(long, short, default_value = "detect.json")]
    out: PathBuf,
}

fn python_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in walkdir::WalkDir::new(p).sort_by_file_name() {
                let entry = entry.runtime_err()?;
                if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "py") {
                    files.push(entry.into_path());
                }
            }
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(Failure::Config(anyhow!("no such file or directory: {}", p.display())));
        }
    }
    Ok(files)
}

pub fn run_detect(ctx: &Ctx, args: DetectArgs) -> CmdResult {
    let profile = ctx.profile()?;
    let files = python_files(&args.paths)?;
    let report = detect_corpus(&files, &profile);
    let mut json = serde_json::to_string_pretty(&report).runtime_err()?;
    json.push('\n');
    write_file(&args.out, &json)?;
    print!("{}", emit_report(Report::Distribution(&report), None, ReportFormat::Text));
    Ok(Outcome::Success)
}

#[derive(clap::Args)]
pub struct SnippetArgs {
    /// Corpus report written by `detect`.
    #[arg(long)]
    report: PathBuf,
    /// Snippet manifest (JSON lines).
    #[arg(long, short, default_value = "snippets.jsonl")]
    out: PathBuf,
    /// Estimated-token limit; snippets above it are dropped.
    #[arg(long)]
    token_limit: Option<u32>,
    /// Keep every snippet regardless of size.
    #[arg(long, conflicts_with = "token_limit")]
    no_token_limit: bool,
}

pub fn read_corpus_report(path: &PathBuf) -> Result<CorpusReport, Failure> {
    let f = File::open(path).map_err(|e| Failure::Config(anyhow!("cannot open report {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Failure::Config(anyhow!("invalid report {}: {e}", path.display())))
}

pub fn run_snippets(ctx: &Ctx, args: SnippetArgs) -> CmdResult {
    let report = read_corpus_report(&args.report)?;
    let limit = if args.no_token_limit {
        None
    } else {
        args.token_limit.or(ctx.config.fix.token_limit)
    };
    let mut built = Vec::new();
    for file in report.files.iter().filter(|f| !f.instances.is_empty()) {
        let text = std::fs::read_to_string(&file.path)
            .map_err(|e| Failure::Runtime(anyhow!("cannot read {}: {e}", file.path.display())))?;
        let unit = parse_source(&file.path, text).map_err(|e| Failure::Runtime(anyhow!("{}: {e}", file.path.display())))?;
        let builder = SnippetBuilder::new(&unit);
        for inst in &file.instances {
            built.push(builder.build(inst).runtime_err()?);
        }
    }
    let instances = built.len();
    let merged = consolidate(built);
    let smells = SnippetCounts::of(&merged).smells;
    let (kept, dropped) = filter_token_limit(merged, limit);
    let counts = SnippetCounts::of(&kept);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).runtime_err()?;
    }
    let mut w = BufWriter::new(File::create(&args.out).runtime_err()?);
    write_manifest(&mut w, &kept, &dropped).runtime_err()?;
    w.flush().runtime_err()?;
    println!(
        "{instances} instances, {smells} smells after consolidation; kept {} smells in {} snippets, dropped {} snippets over the token limit",
        counts.smells,
        counts.snippets,
        dropped.len()
    );
    Ok(Outcome::Success)
}
