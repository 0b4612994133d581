#![allow(dead_code)]

pub mod oracle;

use std::path::{Path, PathBuf};

use smellfix_core::snippets::{consolidate, SmellSnippet, SnippetBuilder};
use smellfix_core::{detect, parse_source, ThresholdProfile};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "py"))
        .collect();
    files.sort();
    files
}

/// Consolidated snippets for the named fixtures (relative file names).
pub fn snippets_for(names: &[&str]) -> Vec<SmellSnippet> {
    let profile = ThresholdProfile::tuning_machine();
    let mut out = Vec::new();
    for name in names {
        let text = std::fs::read_to_string(corpus_dir().join(name)).unwrap();
        let unit = parse_source(*name, text).unwrap();
        let builder = SnippetBuilder::new(&unit);
        for inst in detect(&unit, &profile) {
            out.push(builder.build(&inst).unwrap());
        }
    }
    consolidate(out)
}
