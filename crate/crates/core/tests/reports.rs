mod support;

use smellfix_core::evaluator::{fixing_rates, FixVerdict, Verdict, VerdictReason};
use smellfix_core::fixloop::PromptTier;
use smellfix_core::report::{emit_report, Report, ReportFormat, ReportSource};
use smellfix_core::{detect_corpus, SmellType, ThresholdProfile};

const DISTRIBUTION_TEXT: &str = "\
Smell  Count  Percent
LPL        8    17.4%
LMC        6    13.0%
MNC        6    13.0%
LSC        5    10.9%
LBCL       4     8.7%
LTCE       4     8.7%
CCC        4     8.7%
LM         3     6.5%
LC         3     6.5%
LLF        3     6.5%
Total     46
Smelly files: 33 of 37 (89.2%)
";

const DISTRIBUTION_CSV: &str = "\
smell,count,percent
LPL,8,17.4
LMC,6,13.0
MNC,6,13.0
LSC,5,10.9
LBCL,4,8.7
LTCE,4,8.7
CCC,4,8.7
LM,3,6.5
LC,3,6.5
LLF,3,6.5
";

#[test]
fn corpus_distribution_golden() {
    let profile = ThresholdProfile::tuning_machine();
    let report = detect_corpus(&support::corpus_files(), &profile);
    let text = emit_report(Report::Distribution(&report), None, ReportFormat::Text);
    let (head, body) = text.split_once('\n').unwrap();
    assert_eq!(head, format!("Profile tuning-machine ({})", &profile.hash()[..12]));
    assert_eq!(body, DISTRIBUTION_TEXT);
    assert_eq!(emit_report(Report::Distribution(&report), None, ReportFormat::Csv), DISTRIBUTION_CSV);

    let source = ReportSource {
        manifest: "run/manifest.json".into(),
        run_id: "0123456789abcdef".into(),
    };
    let json: serde_json::Value =
        serde_json::from_str(&emit_report(Report::Distribution(&report), Some(&source), ReportFormat::Json)).unwrap();
    assert_eq!(json["kind"], "smell-distribution");
    assert_eq!(json["source"]["run_id"], "0123456789abcdef");
    assert_eq!(json["files_scanned"], 37);
    assert_eq!(json["files_smelly"], 33);
    assert_eq!(json["smelly_ratio"], 89.2);
    assert_eq!(json["total_instances"], 46);
    assert_eq!(json["rows"][0], serde_json::json!({"smell": "LPL", "count": 8, "percent": 17.4}));
}

fn verdicts() -> Vec<FixVerdict> {
    let spec = [
        (SmellType::Lpl, PromptTier::General, [true, false, false].as_slice()),
        (SmellType::Lpl, PromptTier::CodeSmell, &[true, true, false]),
        (SmellType::Lpl, PromptTier::Specific, &[true, true, true]),
        (SmellType::Lsc, PromptTier::General, &[false, false]),
        (SmellType::Lsc, PromptTier::Specific, &[false, true]),
    ];
    let mut out = Vec::new();
    for (smell, tier, outcomes) in spec {
        for &fixed in outcomes {
            out.push(FixVerdict {
                attempt: out.len(),
                snippet_id: format!("s{}.py#L1-L2", out.len()),
                smell_type: smell,
                tier,
                verdict: if fixed { Verdict::Fixed } else { Verdict::Unfixed },
                reason: if fixed { VerdictReason::SmellAbsent } else { VerdictReason::SmellPersists },
                residual_metric: (!fixed).then_some(9),
                new_smells: Vec::new(),
            });
        }
    }
    out
}

const RATES_TEXT: &str = "\
Run 0123456789abcdef (run/manifest.json)
Smell        General   Code smell      Specific       Average
LPL      33.3% (1/3)  66.7% (2/3)  100.0% (3/3)   66.7% (6/9)
LSC       0.0% (0/2)            -   50.0% (1/2)   25.0% (1/4)
Average  20.0% (1/5)  66.7% (2/3)   80.0% (4/5)  53.8% (7/13)
";

const RATES_CSV: &str = "\
smell,tier,fixed,total,rate
LPL,general,1,3,33.3
LPL,code_smell,2,3,66.7
LPL,specific,3,3,100.0
LSC,general,0,2,0.0
LSC,specific,1,2,50.0
LPL,average,6,9,66.7
LSC,average,1,4,25.0
average,general,1,5,20.0
average,code_smell,2,3,66.7
average,specific,4,5,80.0
average,average,7,13,53.8
";

#[test]
fn fixing_rate_golden() {
    let table = fixing_rates(&verdicts());
    let source = ReportSource {
        manifest: "run/manifest.json".into(),
        run_id: "0123456789abcdef".into(),
    };
    assert_eq!(emit_report(Report::Rates(&table), Some(&source), ReportFormat::Text), RATES_TEXT);
    assert_eq!(emit_report(Report::Rates(&table), None, ReportFormat::Csv), RATES_CSV);
    let json: serde_json::Value =
        serde_json::from_str(&emit_report(Report::Rates(&table), None, ReportFormat::Json)).unwrap();
    assert_eq!(json["kind"], "fixing-rates");
    assert_eq!(json["overall"], serde_json::json!({"fixed": 7, "total": 13, "rate": 53.8}));
    assert_eq!(json["tiers"], serde_json::json!(["general", "code_smell", "specific"]));
    assert_eq!(json["cells"].as_array().unwrap().len(), 5);
}

#[test]
fn reports_are_stable_across_runs() {
    let profile = ThresholdProfile::tuning_machine();
    let a = detect_corpus(&support::corpus_files(), &profile);
    let mut reversed = support::corpus_files();
    reversed.reverse();
    let b = detect_corpus(&reversed, &profile);
    for f in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Text] {
        assert_eq!(emit_report(Report::Distribution(&a), None, f), emit_report(Report::Distribution(&b), None, f));
    }
}
