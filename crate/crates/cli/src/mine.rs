use std::fs::File;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::anyhow;
use clap::Subcommand;
use smellfix_core::miner::{
    apply_labels, candidates_from_dir, dedup, export_session, import_labels, Candidate, HttpResponse, MineError, Miner,
    PageCache, ReqwestTransport, SearchTerm, Transport, TransportError,
};

use crate::{Classify, CmdResult, Ctx, Failure, Outcome};

#[derive(Subcommand)]
pub enum MineCommand {
    /// Keyword search over repositories and Python code; writes a labelling session.
    Search {
        /// `ID=phrase`; repeat for several terms. Defaults to the configured terms.
        #[arg(long = "term")]
        terms: Vec<String>,
        #[arg(long)]
        max_pages: Option<u32>,
        /// Only read the page cache; never touch the network.
        #[arg(long)]
        offline: bool,
        #[arg(long, short, default_value = "candidates.csv")]
        out: PathBuf,
    },
    /// Hash local Python files into a deduplicated labelling session.
    Local {
        dir: PathBuf,
        #[arg(long, short, default_value = "candidates.csv")]
        out: PathBuf,
    },
    /// Check an edited session against the exported one and write the labelled result.
    Labels {
        /// Session as exported.
        #[arg(long)]
        session: PathBuf,
        /// The same session after labelling.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, short, default_value = "labelled.csv")]
        out: PathBuf,
    },
}

struct Offline;

impl Transport for Offline {
    fn get(&self, url: &str, _token: Option<&str>) -> Result<HttpResponse, TransportError> {
        Err(TransportError(format!("offline and not cached: {url}")))
    }
}

fn parse_term(s: &str) -> Result<SearchTerm, Failure> {
    let (id, phrase) = s
        .split_once('=')
        .ok_or_else(|| Failure::Config(anyhow!("--term expects ID=phrase, got {s:?}")))?;
    Ok(SearchTerm::new(id.trim(), phrase.trim()))
}

fn write_session(out: &PathBuf, candidates: &[Candidate]) -> Result<(), Failure> {
    let f = File::create(out).map_err(|e| Failure::Runtime(anyhow!("cannot write {}: {e}", out.display())))?;
    export_session(f, candidates).runtime_err()
}

fn read_session(path: &PathBuf) -> Result<Vec<(u64, Candidate)>, Failure> {
    let f = File::open(path).map_err(|e| Failure::Config(anyhow!("cannot open {}: {e}", path.display())))?;
    import_labels(f).map_err(|e| Failure::Config(anyhow!("{}: {e}", path.display())))
}

pub fn run(ctx: &Ctx, cmd: MineCommand) -> CmdResult {
    match cmd {
        MineCommand::Search {
            terms,
            max_pages,
            offline,
            out,
        } => {
            let terms = if terms.is_empty() {
                ctx.config.mine.terms.clone()
            } else {
                terms.iter().map(|t| parse_term(t)).collect::<Result<_, _>>()?
            };
            let mut host = ctx.config.mine.host.clone();
            if let Some(n) = max_pages {
                host.max_pages = n;
            }
            let online;
            let transport: &dyn Transport = if offline {
                &Offline
            } else {
                online = ReqwestTransport::new(Duration::from_secs(30)).runtime_err()?;
                &online
            };
            let miner = Miner::new(transport, host, Some(PageCache::new(ctx.cache_dir.join("search"))));
            let found = miner.search(&terms).map_err(|e| match e {
                MineError::AuthError { .. } => Failure::Config(e.into()),
                e => Failure::Runtime(e.into()),
            })?;
            let hits = found.len();
            let candidates = dedup(found);
            write_session(&out, &candidates)?;
            println!("{hits} hits, {} distinct candidates -> {}", candidates.len(), out.display());
        }
        MineCommand::Local { dir, out } => {
            if !dir.is_dir() {
                return Err(Failure::Config(anyhow!("not a directory: {}", dir.display())));
            }
            let found = candidates_from_dir(&dir).runtime_err()?;
            let files = found.len();
            let candidates = dedup(found);
            write_session(&out, &candidates)?;
            println!("{files} files, {} distinct -> {}", candidates.len(), out.display());
        }
        MineCommand::Labels { session, labels, out } => {
            let original: Vec<Candidate> = read_session(&session)?.into_iter().map(|(_, c)| c).collect();
            let edited = read_session(&labels)?;
            let labelled = apply_labels(&original, &edited).config_err()?;
            write_session(&out, &labelled)?;
            println!("{} rows labelled -> {}", edited.len(), out.display());
        }
    }
    Ok(Outcome::Success)
}
