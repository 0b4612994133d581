//! Metric-based detection of Python code smells, reference-snippet
//! construction, an LLM fix loop and fixing-rate evaluation.

pub mod detector;
pub mod evaluator;
pub mod fixloop;
pub mod manifest;
pub mod miner;
pub mod metrics;
pub mod profile;
pub mod rate;
pub mod report;
pub mod smell;
pub mod snippets;
pub mod syntax;

pub use detector::{detect, detect_corpus, CorpusReport, SmellInstance};
pub use profile::ThresholdProfile;
pub use smell::{MetricId, SmellType};
pub use syntax::{enumerate_entities, parse_source, CodeEntity, EntityKind, ParseError, SourceUnit, Span};
