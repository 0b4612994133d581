use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::anyhow;
use smellfix_core::detector::ProfileRef;
use smellfix_core::fixloop::backend::TranscriptRecord;
use smellfix_core::fixloop::runner::write_attempt;
use smellfix_core::fixloop::{plan_attempts, run_attempts, Clock, PromptTier, RunOptions};
use smellfix_core::manifest::{run_id, FileRef, RunManifest, TOOL_VERSION};
use smellfix_core::snippets::{filter_token_limit, read_manifest};

use crate::config::select_backend;
use crate::{write_file, Classify, CmdResult, Ctx, Failure, Outcome};

pub const ATTEMPTS_FILE: &str = "attempts.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(clap::Args)]
pub struct FixArgs {
    /// Snippet manifest written by `snippets`.
    #[arg(long)]
    snippets: PathBuf,
    /// `echo` or a backend file (TOML); defaults to the config's [backend].
    #[arg(long)]
    backend: Option<String>,
    /// Comma-separated tiers: general, code_smell, specific.
    #[arg(long)]
    tiers: Option<String>,
    /// Concurrent requests to the backend.
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Drop snippets above this estimated-token count before prompting.
    #[arg(long)]
    token_limit: Option<u32>,
    /// Run directory for the attempts store and run manifest.
    #[arg(long, default_value = "run")]
    out_dir: PathBuf,
    /// Also write the responses as a replay transcript.
    #[arg(long)]
    transcript_out: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: FixArgs) -> CmdResult {
    let profile = ctx.profile()?;
    let cfg = &ctx.config.fix;
    let tiers_arg = args.tiers.as_deref().unwrap_or(&cfg.tiers);
    let tiers = PromptTier::parse_list(tiers_arg).map_err(|e| Failure::Config(anyhow!("--tiers: unknown tier {e}")))?;
    let backend = select_backend(args.backend.as_deref(), &ctx.config, &ctx.config_base).config_err()?;

    let bytes = std::fs::read(&args.snippets)
        .map_err(|e| Failure::Config(anyhow!("cannot read snippet manifest {}: {e}", args.snippets.display())))?;
    let records = read_manifest(BufReader::new(&bytes[..])).config_err()?;
    let snippets: Vec<_> = records
        .into_iter()
        .filter(|r| r.dropped.is_none())
        .map(|r| r.into_snippet())
        .collect();
    let (snippets, dropped) = filter_token_limit(snippets, args.token_limit);
    for d in &dropped {
        tracing::info!(snippet = %d.snippet.snippet_id, "skipped: {}", d.reason);
    }

    let clock = Clock::from_env();
    let started_at = clock.now();
    let opts = RunOptions {
        max_in_flight: args.max_in_flight.unwrap_or(cfg.max_in_flight),
        retry: cfg.retry(),
        rate_per_sec: cfg.rate_per_sec,
        clock,
    };
    let plan = plan_attempts(&snippets, &tiers);
    std::fs::create_dir_all(&args.out_dir).runtime_err()?;
    let store_path = args.out_dir.join(ATTEMPTS_FILE);
    let mut store = BufWriter::new(File::create(&store_path).runtime_err()?);
    let mut transcript = Vec::new();
    let summary = run_attempts(&plan, backend.as_ref(), &opts, |a| {
        write_attempt(&mut store, a)?;
        store.flush()?;
        if a.error.is_none() {
            transcript.push(TranscriptRecord {
                snippet_id: a.snippet_id.clone(),
                tier: a.tier,
                smell: Some(a.target_smell.smell_type),
                response: a.raw_response.clone(),
            });
        }
        Ok::<_, std::io::Error>(())
    })
    .runtime_err()?;
    drop(store);

    if let Some(path) = &args.transcript_out {
        let mut text = String::new();
        for r in &transcript {
            text.push_str(&serde_json::to_string(r).runtime_err()?);
            text.push('\n');
        }
        write_file(path, &text)?;
    }

    let profile_ref = ProfileRef::from(&profile);
    let snippet_ref = FileRef::new(args.snippets.display().to_string(), &bytes);
    let descriptor = backend.descriptor().clone();
    let manifest = RunManifest {
        run_id: run_id(&profile_ref, &snippet_ref, &descriptor, &tiers),
        tool_version: TOOL_VERSION.to_string(),
        profile: profile_ref,
        snippet_manifest: snippet_ref,
        backend_config_hash: descriptor.config_hash(),
        backend: descriptor,
        tiers,
        token_limit: args.token_limit,
        attempts_store: ATTEMPTS_FILE.to_string(),
        attempts: summary.attempts,
        errored_attempts: summary.errored,
        started_at,
        finished_at: opts.clock.now(),
    };
    write_file(&args.out_dir.join(MANIFEST_FILE), &manifest.to_json())?;
    println!(
        "{} attempts over {} snippets, {} errored; run {} in {}",
        summary.attempts,
        snippets.len(),
        summary.errored,
        manifest.run_id,
        args.out_dir.display()
    );
    Ok(if summary.errored > 0 { Outcome::Partial } else { Outcome::Success })
}
