//! `metrics` over committed transcripts must reproduce the committed reports.
//! Regenerate with `cargo test -p backprompt --test golden -- --ignored`.

mod common;

use std::collections::BTreeMap;
use std::fs;

use backprompt::config::RunConfig;
use backprompt::runner::{run_suite, write_report, RunMeta};
use backprompt::store::to_jsonl;
use common::*;

const REPORT_FILES: [&str; 4] = ["report.md", "accuracy.csv", "confusion.csv", "curve.csv"];

#[test]
fn metrics_reproduce_committed_reports() {
    let golden = fixtures().join("golden");
    let out = tempfile::tempdir().unwrap();
    let o = run_cli(&[
        "metrics",
        golden.join("transcripts.jsonl").to_str().unwrap(),
        "--manifest",
        golden.join("manifest.json").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in REPORT_FILES {
        let want = fs::read_to_string(golden.join(name)).unwrap();
        let got = fs::read_to_string(out.path().join(name)).unwrap();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn committed_reports_contain_count_annotations() {
    let report = fs::read_to_string(fixtures().join("golden/report.md")).unwrap();
    // Rates are printed with their counts, e.g. "41.7% (5/12)".
    let annotated = report.lines().filter(|l| l.contains("% (") && l.contains('/')).count();
    assert!(annotated >= 2, "{report}");
}

/// Three game24 strategies over 12 puzzles: sound first-error critique, a
/// self-critique whose scripted verifier sometimes rejects right answers,
/// and sampling.
#[test]
#[ignore]
fn regenerate_golden_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let (_, puzzles) = game24_file(dir.path(), 12);
    let mut generator = BTreeMap::new();
    let mut verifier = BTreeMap::new();
    for (i, n) in puzzles.iter().enumerate() {
        let rank = i + 1;
        let id = format!("g24-{rank:04}");
        let mut answers: Vec<String> = (0..rank % 4).map(|_| wrong(n)).collect();
        answers.push(format!("Answer: {}", solution(n)));
        answers.push(wrong(n));
        answers.push(format!("Answer: {}", solution(n)));
        generator.insert(id.clone(), answers);
        let replies: Vec<String> = (0..15)
            .map(|j| match (rank + j) % 4 {
                0 => "Verdict: CORRECT",
                _ => "Verdict: INCORRECT\nThe expression does not reach 24.",
            })
            .map(String::from)
            .collect();
        verifier.insert(id, replies);
    }
    write_json(&dir.path().join("generator.json"), &generator);
    write_json(&dir.path().join("verifier.json"), &verifier);
    let strategies = [
        r#"{ kind = "sound_critique", level = "first_error", max_rounds = 15 }"#,
        r#"{ kind = "self_critique", max_rounds = 15 }"#,
        r#"{ kind = "sampling", k = 15 }"#,
    ];
    let mut transcripts = Vec::new();
    let mut manifest = None;
    for strategy in strategies {
        let text = format!(
            "domain = \"game24\"\nstrategy = {strategy}\noutput_dir = \"out\"\nseed = 5\n\n[instances]\npath = \"game24.txt\"\nnumber_max = 8\n\n[generator]\nkind = \"scripted\"\npath = \"generator.json\"\n\n[verifier]\nkind = \"scripted\"\npath = \"verifier.json\"\n"
        );
        let cfg = RunConfig::from_toml(&text, dir.path(), &dir.path().join("run.toml")).unwrap();
        let out = run_suite(&cfg, "golden fixture", RunMeta::default()).unwrap();
        transcripts.extend(out.transcripts);
        manifest.get_or_insert(out.manifest);
    }
    let mut manifest = manifest.unwrap();
    manifest.strategy = "mixed".into();
    manifest.instances = transcripts.len();
    manifest.failed = transcripts
        .iter()
        .filter(|t| t.error.is_some())
        .map(|t| t.instance_id.clone())
        .collect();
    let golden = fixtures().join("golden");
    fs::create_dir_all(&golden).unwrap();
    fs::write(golden.join("transcripts.jsonl"), to_jsonl(&transcripts)).unwrap();
    fs::write(golden.join("manifest.json"), manifest.to_json()).unwrap();
    let report = backprompt::runner::metrics_from_files(
        &golden.join("transcripts.jsonl"),
        Some(&golden.join("manifest.json")),
    )
    .unwrap();
    write_report(&golden, &report).unwrap();
}
