mod config;
mod detect;
mod fix;
mod mine;
mod report;

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smellfix_core::ThresholdProfile;
use tracing_subscriber::EnvFilter;

use crate::config::Config;

#[derive(Parser)]
#[command(name = "smellfix", version, about = "Detect Python code smells, ask an LLM to fix them, and measure how often it succeeds")]
struct Cli {
    /// Threshold profile: `tuning-machine` or a profile file.
    #[arg(long, global = true, default_value = "tuning-machine")]
    profile: String,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where raw search responses are cached.
    #[arg(long, global = true, default_value = ".smellfix-cache")]
    cache_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a code host for candidate files and manage labelling sessions.
    #[command(subcommand)]
    Mine(mine::MineCommand),
    /// Detect smells in Python files and write a corpus report.
    Detect(detect::DetectArgs),
    /// Turn a corpus report into a snippet manifest.
    Snippets(detect::SnippetArgs),
    /// Run the prompt tiers against a backend for every snippet.
    Fix(fix::FixArgs),
    /// Judge a fix run and write fixing-rate and distribution reports.
    Report(report::ReportArgs),
}

pub enum Outcome {
    Success,
    /// Finished, but some attempts errored.
    Partial,
}

pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

pub type CmdResult = Result<Outcome, Failure>;

pub trait Classify<T> {
    fn config_err(self) -> Result<T, Failure>;
    fn runtime_err(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

pub struct Ctx {
    pub profile_arg: String,
    pub config: Config,
    pub config_base: PathBuf,
    pub cache_dir: PathBuf,
}

impl Ctx {
    pub fn profile(&self) -> Result<ThresholdProfile, Failure> {
        ThresholdProfile::resolve(&self.profile_arg).config_err()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).runtime_err()?;
    }
    std::fs::write(path, contents).map_err(|e| Failure::Runtime(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> CmdResult {
    let (config, config_base) = Config::load(cli.config.as_deref()).config_err()?;
    let ctx = Ctx {
        profile_arg: cli.profile,
        config,
        config_base,
        cache_dir: cli.cache_dir,
    };
    match cli.command {
        Command::Mine(c) => mine::run(&ctx, c),
        Command::Detect(a) => detect::run_detect(&ctx, a),
        Command::Snippets(a) => detect::run_snippets(&ctx, a),
        Command::Fix(a) => fix::run(&ctx, a),
        Command::Report(a) => report::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    match run(Cli::parse()) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(1),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
    }
}
