//! Threshold profiles: metric id → exceedance threshold.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::MetricOptions;
use crate::smell::MetricId;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read profile {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid profile document: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("profile `{profile}` has no threshold for {metric}")]
    MissingThreshold { profile: String, metric: MetricId },
    #[error("profile `{profile}`: threshold for {metric} must be >= 1")]
    ThresholdTooSmall { profile: String, metric: MetricId },
    #[error("profile slot `{0}` has no shipped values; supply a profile file")]
    NotSupplied(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// metric > threshold
    #[default]
    Strict,
    /// metric >= threshold
    Inclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdProfile {
    pub name: String,
    #[serde(default)]
    pub provenance: String,
    #[serde(default)]
    pub comparison: Comparison,
    pub thresholds: BTreeMap<MetricId, u32>,
    #[serde(default)]
    pub options: MetricOptions,
}

/// The three named strategies a profile can fill.
pub const PROFILE_SLOTS: [&str; 3] = ["tuning-machine", "experience-based", "statistics-based"];

impl ThresholdProfile {
    /// Default `tuning-machine` profile.
    pub fn tuning_machine() -> Self {
        use MetricId::*;
        let thresholds = [
            (Par, 4),
            (Mloc, 38),
            (ScopeChain, 2),
            (Cloc, 28),
            (ChainLen, 3),
            (Nbc, 2),
            (LambdaLen, 47),
            (TernaryLen, 53),
            (ClauseCount, 3),
            (ContainerDepth, 2),
        ]
        .into_iter()
        .collect();
        Self {
            name: "tuning-machine".into(),
            provenance: "Pysmell tuning-machine strategy, transcribed from memory of the \
                         published threshold table; not yet checked against the Pysmell \
                         replication artifacts. Replace with a verified profile file before \
                         relying on absolute counts."
                .into(),
            comparison: Comparison::Strict,
            thresholds,
            options: MetricOptions::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ProfileError> {
        let profile: ThresholdProfile = toml::from_str(text)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Resolve a slot name or a profile file path.
    pub fn resolve(spec: &str) -> Result<Self, ProfileError> {
        match spec {
            "tuning-machine" => Ok(Self::tuning_machine()),
            "experience-based" | "statistics-based" => Err(ProfileError::NotSupplied(spec.into())),
            path => Self::load(Path::new(path)),
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        for metric in MetricId::ALL {
            match self.thresholds.get(&metric) {
                None => {
                    return Err(ProfileError::MissingThreshold {
                        profile: self.name.clone(),
                        metric,
                    })
                }
                Some(0) => {
                    return Err(ProfileError::ThresholdTooSmall {
                        profile: self.name.clone(),
                        metric,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn threshold(&self, metric: MetricId) -> u32 {
        self.thresholds[&metric]
    }

    pub fn exceeds(&self, metric: MetricId, value: u32) -> bool {
        let t = self.threshold(metric);
        match self.comparison {
            Comparison::Strict => value > t,
            Comparison::Inclusive => value >= t,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile serializes")
    }

    /// SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("profile serializes");
        hex::encode(Sha256::digest(&json))
    }
}
