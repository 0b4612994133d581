//! The `--config` document and backend selection.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use smellfix_core::fixloop::backend::{MockAction, MockRule, Scenario};
use smellfix_core::fixloop::{Backend, HttpChat, HttpChatConfig, Replay, RetryPolicy, ScriptedMock};
use smellfix_core::miner::{default_terms, HostConfig, SearchTerm};
use smellfix_core::snippets::DEFAULT_TOKEN_LIMIT;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub mine: MineConfig,
    pub fix: FixConfig,
    pub backend: Option<BackendConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineConfig {
    pub host: HostConfig,
    pub terms: Vec<SearchTerm>,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self {
            host: HostConfig::default(),
            terms: default_terms(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixConfig {
    pub tiers: String,
    pub max_in_flight: usize,
    pub token_limit: Option<u32>,
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    pub rate_per_sec: Option<f64>,
}

impl Default for FixConfig {
    fn default() -> Self {
        let r = RetryPolicy::default();
        Self {
            tiers: "general,code_smell,specific".into(),
            max_in_flight: 4,
            token_limit: Some(DEFAULT_TOKEN_LIMIT),
            max_retries: r.max_retries,
            base_delay_ms: r.base_delay.as_millis() as u64,
            max_delay_ms: r.max_delay.as_millis() as u64,
            rate_per_sec: None,
        }
    }
}

impl FixConfig {
    pub fn retry(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base_delay: Duration::from_millis(self.base_delay_ms),
            max_delay: Duration::from_millis(self.max_delay_ms),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BackendConfig {
    HttpChat {
        id: Option<String>,
        endpoint: String,
        model: String,
        api_key_env: Option<String>,
        timeout_secs: Option<u64>,
    },
    Replay {
        id: Option<String>,
        transcript: PathBuf,
    },
    ScriptedMock {
        id: Option<String>,
        /// Scenario file; otherwise the inline `default` and `rule` entries.
        scenario: Option<PathBuf>,
        #[serde(default)]
        default: MockAction,
        #[serde(default)]
        rule: Vec<MockRule>,
    },
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<(Self, PathBuf)> {
        let Some(path) = path else {
            return Ok((Config::default(), PathBuf::from(".")));
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: Config = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        Ok((cfg, base_dir(path)))
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl BackendConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read backend file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid backend file {}", path.display()))
    }

    /// Builds the backend; relative file paths are taken from `base`.
    pub fn build(&self, base: &Path, default_id: &str) -> Result<Box<dyn Backend>> {
        let id = |v: &Option<String>| v.clone().unwrap_or_else(|| default_id.to_string());
        Ok(match self {
            BackendConfig::HttpChat {
                id: i,
                endpoint,
                model,
                api_key_env,
                timeout_secs,
            } => {
                let cfg = HttpChatConfig {
                    endpoint: endpoint.clone(),
                    model: model.clone(),
                    api_key_env: api_key_env.clone(),
                    timeout_secs: timeout_secs.unwrap_or(120),
                };
                Box::new(HttpChat::new(id(i), cfg)?)
            }
            BackendConfig::Replay { id: i, transcript } => Box::new(Replay::load(id(i), &resolve(base, transcript))?),
            BackendConfig::ScriptedMock {
                id: i,
                scenario,
                default,
                rule,
            } => match scenario {
                Some(p) => {
                    if !rule.is_empty() {
                        bail!("scripted-mock takes either a scenario file or inline rules, not both");
                    }
                    Box::new(ScriptedMock::load(id(i), &resolve(base, p))?)
                }
                None => Box::new(ScriptedMock::new(
                    id(i),
                    Scenario {
                        default: *default,
                        rules: rule.clone(),
                    },
                )),
            },
        })
    }
}

/// `echo`, or the path of a backend file.
pub fn select_backend(arg: Option<&str>, cfg: &Config, cfg_base: &Path) -> Result<Box<dyn Backend>> {
    match arg {
        Some("echo") => Ok(Box::new(ScriptedMock::echo())),
        Some(path) => {
            let path = Path::new(path);
            let stem = path.file_stem().map_or("backend".into(), |s| s.to_string_lossy().into_owned());
            BackendConfig::load(path)?.build(&base_dir(path), &stem)
        }
        None => match &cfg.backend {
            Some(b) => b.build(cfg_base, "backend"),
            None => bail!("no backend: pass --backend or add a [backend] table to the config"),
        },
    }
}
