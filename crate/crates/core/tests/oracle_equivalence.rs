mod support;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use smellfix_core::{detect, parse_source, SmellType, ThresholdProfile};
use support::oracle::{self, Finding};

fn corpus() -> Vec<std::path::PathBuf> {
    support::corpus_files()
}

fn thresholds(profile: &ThresholdProfile) -> BTreeMap<&'static str, u32> {
    SmellType::ALL
        .into_iter()
        .map(|t| (t.abbreviation(), profile.threshold(t.metric())))
        .collect()
}

fn detected(path: &Path, profile: &ThresholdProfile) -> Vec<Finding> {
    let text = std::fs::read_to_string(path).unwrap();
    let unit = parse_source(path, text).unwrap();
    let mut got: Vec<Finding> = detect(&unit, profile)
        .into_iter()
        .map(|i| (i.smell_type.abbreviation().to_string(), i.span.start_line, i.span.start_col, i.metric_value))
        .collect();
    got.sort();
    got
}

#[test]
fn corpus_covers_every_smell_and_clean_files() {
    let profile = ThresholdProfile::tuning_machine();
    let t = thresholds(&profile);
    let files = corpus();
    assert!(files.len() >= 30, "only {} fixtures", files.len());
    let mut per_type: BTreeMap<String, usize> = BTreeMap::new();
    let mut clean = 0;
    for f in &files {
        let found = oracle::findings(&std::fs::read_to_string(f).unwrap(), &t);
        if found.is_empty() {
            clean += 1;
        }
        for (abbr, ..) in found {
            *per_type.entry(abbr).or_default() += 1;
        }
    }
    for smell in SmellType::ALL {
        let n = per_type.get(smell.abbreviation()).copied().unwrap_or(0);
        assert!(n >= 3, "{} has {n} fixture instances", smell.abbreviation());
    }
    assert!(clean >= 3, "{clean} clean fixtures");
}

#[test]
fn detector_matches_oracle_on_corpus() {
    let profile = ThresholdProfile::tuning_machine();
    let t = thresholds(&profile);
    let started = Instant::now();
    for f in corpus() {
        let expect = oracle::findings(&std::fs::read_to_string(&f).unwrap(), &t);
        assert_eq!(detected(&f, &profile), expect, "{}", f.display());
    }
    assert!(started.elapsed() < Duration::from_secs(5));
}

#[test]
fn detector_matches_oracle_at_zero_thresholds() {
    // Every measured entity is reported, so metric values are compared
    // for clean entities as well.
    let mut profile = ThresholdProfile::tuning_machine();
    for v in profile.thresholds.values_mut() {
        *v = 0;
    }
    let t = thresholds(&profile);
    for f in corpus() {
        let expect = oracle::findings(&std::fs::read_to_string(&f).unwrap(), &t);
        assert_eq!(detected(&f, &profile), expect, "{}", f.display());
    }
}
