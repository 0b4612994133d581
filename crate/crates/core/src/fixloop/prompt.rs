//! The three instruction templates sent with every snippet.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::smell::{SmellType, UnknownName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptTier {
    General,
    CodeSmell,
    Specific,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("the {0} prompt needs a smell name")]
pub struct MissingSmellName(pub PromptTier);

impl PromptTier {
    pub const ALL: [PromptTier; 3] = [PromptTier::General, PromptTier::CodeSmell, PromptTier::Specific];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptTier::General => "general",
            PromptTier::CodeSmell => "code_smell",
            PromptTier::Specific => "specific",
        }
    }

    /// Template text; `[smell-name]` marks the substitution point.
    pub fn template(self) -> &'static str {
        match self {
            PromptTier::General => "Fix the problem in the selected code",
            PromptTier::CodeSmell => "Fix the code smell in the selected code",
            PromptTier::Specific => "Fix the [smell-name] code smell in the selected code",
        }
    }

    /// Parses a comma-separated tier list such as `general,specific`.
    pub fn parse_list(s: &str) -> Result<Vec<PromptTier>, UnknownName> {
        let mut tiers = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let t: PromptTier = part.parse()?;
            if !tiers.contains(&t) {
                tiers.push(t);
            }
        }
        if tiers.is_empty() {
            return Err(UnknownName(s.to_string()));
        }
        tiers.sort();
        Ok(tiers)
    }
}

impl fmt::Display for PromptTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptTier {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "general" => Ok(PromptTier::General),
            "code_smell" => Ok(PromptTier::CodeSmell),
            "specific" => Ok(PromptTier::Specific),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

pub fn render_prompt(tier: PromptTier, smell: Option<SmellType>) -> Result<String, MissingSmellName> {
    match tier {
        PromptTier::Specific => {
            let smell = smell.ok_or(MissingSmellName(tier))?;
            Ok(tier.template().replace("[smell-name]", smell.full_name()))
        }
        _ => Ok(tier.template().to_string()),
    }
}
