//! The ten metric-based Python smells and the metric behind each one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricId {
    #[serde(rename = "PAR")]
    Par,
    #[serde(rename = "MLOC")]
    Mloc,
    #[serde(rename = "DOC_CHAIN")]
    ScopeChain,
    #[serde(rename = "CLOC")]
    Cloc,
    #[serde(rename = "LMC_LEN")]
    ChainLen,
    #[serde(rename = "NBC")]
    Nbc,
    #[serde(rename = "LLF_LEN")]
    LambdaLen,
    #[serde(rename = "LTCE_LEN")]
    TernaryLen,
    #[serde(rename = "CNC")]
    ClauseCount,
    #[serde(rename = "DOC")]
    ContainerDepth,
}

impl MetricId {
    pub const ALL: [MetricId; 10] = [
        MetricId::Par,
        MetricId::Mloc,
        MetricId::ScopeChain,
        MetricId::Cloc,
        MetricId::ChainLen,
        MetricId::Nbc,
        MetricId::LambdaLen,
        MetricId::TernaryLen,
        MetricId::ClauseCount,
        MetricId::ContainerDepth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::Par => "PAR",
            MetricId::Mloc => "MLOC",
            MetricId::ScopeChain => "DOC_CHAIN",
            MetricId::Cloc => "CLOC",
            MetricId::ChainLen => "LMC_LEN",
            MetricId::Nbc => "NBC",
            MetricId::LambdaLen => "LLF_LEN",
            MetricId::TernaryLen => "LTCE_LEN",
            MetricId::ClauseCount => "CNC",
            MetricId::ContainerDepth => "DOC",
        }
    }

    pub fn smell(self) -> SmellType {
        match self {
            MetricId::Par => SmellType::Lpl,
            MetricId::Mloc => SmellType::Lm,
            MetricId::ScopeChain => SmellType::Lsc,
            MetricId::Cloc => SmellType::Lc,
            MetricId::ChainLen => SmellType::Lmc,
            MetricId::Nbc => SmellType::Lbcl,
            MetricId::LambdaLen => SmellType::Llf,
            MetricId::TernaryLen => SmellType::Ltce,
            MetricId::ClauseCount => SmellType::Ccc,
            MetricId::ContainerDepth => SmellType::Mnc,
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

/// Declaration order is the canonical order used for sorting and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SmellType {
    #[serde(rename = "LPL")]
    Lpl,
    #[serde(rename = "LM")]
    Lm,
    #[serde(rename = "LSC")]
    Lsc,
    #[serde(rename = "LC")]
    Lc,
    #[serde(rename = "LMC")]
    Lmc,
    #[serde(rename = "LBCL")]
    Lbcl,
    #[serde(rename = "LLF")]
    Llf,
    #[serde(rename = "LTCE")]
    Ltce,
    #[serde(rename = "CCC")]
    Ccc,
    #[serde(rename = "MNC")]
    Mnc,
}

impl SmellType {
    pub const ALL: [SmellType; 10] = [
        SmellType::Lpl,
        SmellType::Lm,
        SmellType::Lsc,
        SmellType::Lc,
        SmellType::Lmc,
        SmellType::Lbcl,
        SmellType::Llf,
        SmellType::Ltce,
        SmellType::Ccc,
        SmellType::Mnc,
    ];

    pub fn abbreviation(self) -> &'static str {
        match self {
            SmellType::Lpl => "LPL",
            SmellType::Lm => "LM",
            SmellType::Lsc => "LSC",
            SmellType::Lc => "LC",
            SmellType::Lmc => "LMC",
            SmellType::Lbcl => "LBCL",
            SmellType::Llf => "LLF",
            SmellType::Ltce => "LTCE",
            SmellType::Ccc => "CCC",
            SmellType::Mnc => "MNC",
        }
    }

    pub fn full_name(self) -> &'static str {
        match self {
            SmellType::Lpl => "Long Parameter List",
            SmellType::Lm => "Long Method",
            SmellType::Lsc => "Long Scope Chaining",
            SmellType::Lc => "Large Class",
            SmellType::Lmc => "Long Message Chain",
            SmellType::Lbcl => "Long Base Class List",
            SmellType::Llf => "Long Lambda Function",
            SmellType::Ltce => "Long Ternary Conditional Expression",
            SmellType::Ccc => "Complex Container Comprehension",
            SmellType::Mnc => "Multiply-Nested Container",
        }
    }

    pub fn metric(self) -> MetricId {
        match self {
            SmellType::Lpl => MetricId::Par,
            SmellType::Lm => MetricId::Mloc,
            SmellType::Lsc => MetricId::ScopeChain,
            SmellType::Lc => MetricId::Cloc,
            SmellType::Lmc => MetricId::ChainLen,
            SmellType::Lbcl => MetricId::Nbc,
            SmellType::Llf => MetricId::LambdaLen,
            SmellType::Ltce => MetricId::TernaryLen,
            SmellType::Ccc => MetricId::ClauseCount,
            SmellType::Mnc => MetricId::ContainerDepth,
        }
    }

    /// Smells whose snippet is a whole class or function definition.
    pub fn is_definition_level(self) -> bool {
        matches!(
            self,
            SmellType::Lc | SmellType::Lm | SmellType::Lpl | SmellType::Lsc | SmellType::Lbcl
        )
    }
}

impl fmt::Display for SmellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbreviation())
    }
}

impl FromStr for SmellType {
    type Err = UnknownName;

    /// Accepts the abbreviation or full name; `CC` and `CMC` are accepted as
    /// the alternate column heads some published tables use for CCC and LMC.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.to_ascii_uppercase().as_str() {
            "CC" => return Ok(SmellType::Ccc),
            "CMC" => return Ok(SmellType::Lmc),
            _ => {}
        }
        SmellType::ALL
            .into_iter()
            .find(|t| t.abbreviation().eq_ignore_ascii_case(s) || t.full_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}
