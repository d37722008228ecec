//! Hand-labelled verifier replies scored by the hallucination classifier
//! and the plan critique scorer, plus end-to-end `critique-eval` runs.

mod common;

use std::collections::BTreeMap;
use std::fs;

use backprompt::critique_eval::{label_coloring_response, ColoringCase, PlanCase};
use backprompt::store::parse_jsonl;
use backprompt_core::coloring::{parse_coloring_answer, ColoringInstance, Graph, HallucinationClass};
use backprompt_core::strips::{blocksworld_domain, parse_problem, plan_faults, score_llm_plan_critique, PlanFault};
use backprompt_core::FeedbackLevel;
use common::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Corpus {
    coloring: ColoringPart,
    plans: PlanPart,
}

#[derive(Deserialize)]
struct ColoringPart {
    n: usize,
    edges: Vec<(usize, usize)>,
    colorings: BTreeMap<String, String>,
    cases: Vec<ColoringLabel>,
}

#[derive(Deserialize)]
struct ColoringLabel {
    id: String,
    coloring: String,
    response: String,
    label: HallucinationClass,
    parse_failure: bool,
}

#[derive(Deserialize)]
struct PlanPart {
    problem: String,
    plans: BTreeMap<String, String>,
    cases: Vec<PlanLabel>,
}

#[derive(Deserialize)]
struct PlanLabel {
    id: String,
    plan: String,
    response: String,
    binary_ok: bool,
    type_ok: bool,
    critique_ok: bool,
    parse_failure: bool,
}

fn corpus() -> Corpus {
    serde_json::from_str(&fs::read_to_string(fixtures().join("critique_corpus.json")).unwrap()).unwrap()
}

#[test]
fn corpus_has_thirty_cases() {
    let c = corpus();
    assert_eq!(c.coloring.cases.len() + c.plans.cases.len(), 30);
}

#[test]
fn hallucination_classifier_matches_hand_labels() {
    let c = corpus().coloring;
    let instance = ColoringInstance::new(Graph::from_edges(c.n, c.edges.iter().copied()).unwrap());
    // The "bad" coloring has exactly one monochromatic edge, (2, 3).
    let bad = parse_coloring_answer(&c.colorings["bad"]).unwrap();
    let mono: Vec<_> = c.edges.iter().filter(|(u, v)| bad.color(*u) == bad.color(*v)).collect();
    assert_eq!(mono, [&(2, 3)]);
    let mut disagreements = Vec::new();
    for case in &c.cases {
        let coloring = parse_coloring_answer(&c.colorings[&case.coloring]).unwrap();
        let (_, _, cls) = label_coloring_response(&instance, &coloring, &case.response);
        if cls.label != case.label || cls.parse_failure != case.parse_failure {
            disagreements.push(format!("{}: got {:?}/{}", case.id, cls.label, cls.parse_failure));
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:#?}");
}

#[test]
fn plan_scorer_matches_hand_labels() {
    let c = corpus().plans;
    let domain = blocksworld_domain();
    let problem = parse_problem(&c.problem, &domain).unwrap();
    let faults = |name: &str| plan_faults(&domain, &problem, &c.plans[name], FeedbackLevel::FirstError);
    // Ground truth worked out by hand for the four plans.
    assert!(faults("correct").is_empty());
    assert_eq!(
        faults("inexecutable"),
        [PlanFault::UnmetPrecondition {
            step_index: 1,
            action: "(pickup a)".into(),
            missing_atoms: vec!["(clear a)".into()],
        }]
    );
    assert_eq!(
        faults("inexecutable2"),
        [PlanFault::UnmetPrecondition {
            step_index: 2,
            action: "(pickup c)".into(),
            missing_atoms: vec!["(clear c)".into(), "(handempty)".into(), "(ontable c)".into()],
        }]
    );
    assert_eq!(faults("non_goal_reaching"), [PlanFault::UnmetGoals { atoms: vec!["(on a b)".into()] }]);

    let mut disagreements = Vec::new();
    for case in &c.cases {
        let s = score_llm_plan_critique(&faults(&case.plan), &case.response);
        let want = (case.binary_ok, case.type_ok, case.critique_ok, case.parse_failure);
        let got = (s.binary_ok, s.type_ok, s.critique_ok, s.parse_failure);
        if want != got {
            disagreements.push(format!("{}: want {want:?}, got {got:?}", case.id));
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:#?}");
}

fn scripted_role(dir: &std::path::Path, map: &BTreeMap<String, Vec<String>>) -> std::path::PathBuf {
    write_json(&dir.join("verifier.json"), map);
    let role = dir.join("verifier.toml");
    fs::write(&role, "kind = \"scripted\"\npath = \"verifier.json\"\n").unwrap();
    role
}

#[test]
fn coloring_suite_runs_end_to_end_on_scripted_replies() {
    let dir = tempfile::tempdir().unwrap();
    let graphs = dir.path().join("graphs");
    let o = run_cli(&["gen-instances", "coloring", "--seed", "3", "--count", "6", "--out", graphs.to_str().unwrap()]);
    assert!(o.status.success());
    // Every reply names the pair (0, 1) as a red conflict.
    let reply = "Verdict: INCORRECT\nVertices 0 and 1 are both colored red.".to_string();
    let map: BTreeMap<String, Vec<String>> = (1..=6)
        .flat_map(|i| {
            ["correct", "ablated", "non_optimal", "random"].map(|k| (format!("{i:04}/{k}"), vec![reply.clone()]))
        })
        .collect();
    let role = scripted_role(dir.path(), &map);
    let out = dir.path().join("eval");
    let o = run_cli(&[
        "critique-eval",
        "coloring",
        "--instances",
        graphs.to_str().unwrap(),
        "--verifier",
        role.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("critique_coloring.jsonl")).unwrap();
    let cases: Vec<ColoringCase> = parse_jsonl(&text, &out).unwrap();
    assert_eq!(cases.len(), 24);
    let instances = backprompt::instances::load_all(backprompt_core::harness::DomainTag::Coloring, &graphs, 12).unwrap();
    for case in &cases {
        assert!(case.error.is_none());
        // Independent label from the graph and the rendered coloring.
        let inst = instances.iter().find(|p| p.id == case.instance_id).unwrap();
        let backprompt_core::harness::Payload::Coloring(ci) = &inst.payload else { panic!() };
        let col = parse_coloring_answer(&case.coloring).unwrap();
        let edge = !ci.graph.has_edge(0, 1);
        let vertex = col.color(0) != Some("red") || col.color(1) != Some("red");
        let want = match (vertex, edge) {
            (true, true) => HallucinationClass::Both,
            (false, true) => HallucinationClass::Edge,
            (true, false) => HallucinationClass::Vertex,
            (false, false) => HallucinationClass::None,
        };
        assert_eq!(case.label, want, "{}/{}", case.instance_id, case.kind);
        assert_eq!(case.verification_ok, !case.valid);
    }
    let md = fs::read_to_string(out.join("critique_coloring.md")).unwrap();
    assert!(md.contains("cases | 24") || md.contains("cases: 24"), "{md}");
    assert!(out.join("records.jsonl").exists());
}

#[test]
fn plan_suite_runs_end_to_end_on_scripted_replies() {
    let dir = tempfile::tempdir().unwrap();
    let problems = dir.path().join("bw");
    let o = run_cli(&["gen-instances", "strips", "--seed", "2", "--count", "5", "--out", problems.to_str().unwrap()]);
    assert!(o.status.success());
    let map: BTreeMap<String, Vec<String>> = (1..=5)
        .flat_map(|i| {
            ["correct", "inexecutable", "non_goal_reaching", "random"]
                .map(|k| (format!("p{i:04}/{k}"), vec!["The plan is valid.".to_string()]))
        })
        .collect();
    let role = scripted_role(dir.path(), &map);
    let out = dir.path().join("eval");
    let o = run_cli(&[
        "critique-eval",
        "plans",
        "--instances",
        problems.to_str().unwrap(),
        "--verifier",
        role.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cases: Vec<PlanCase> = parse_jsonl(&fs::read_to_string(out.join("critique_plans.jsonl")).unwrap(), &out).unwrap();
    assert_eq!(cases.len(), 20);
    for case in &cases {
        // "Valid" is right exactly when the simulator finds no fault.
        assert_eq!(case.score.binary_ok, case.ground.is_empty(), "{}/{}", case.instance_id, case.kind);
        assert!(!case.score.parse_failure);
        match case.kind.as_str() {
            "correct" => assert!(case.ground.is_empty()),
            "inexecutable" => assert!(matches!(case.ground[..], [PlanFault::UnmetPrecondition { .. }])),
            "non_goal_reaching" => assert!(matches!(case.ground[..], [PlanFault::UnmetGoals { .. }])),
            _ => {}
        }
    }
}

#[test]
fn critique_eval_reports_transport_errors_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let problems = dir.path().join("bw");
    run_cli(&["gen-instances", "strips", "--seed", "2", "--count", "2", "--out", problems.to_str().unwrap()]);
    let role = scripted_role(dir.path(), &BTreeMap::new());
    let out = dir.path().join("eval");
    let o = run_cli(&[
        "critique-eval",
        "plans",
        "--instances",
        problems.to_str().unwrap(),
        "--verifier",
        role.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let cases: Vec<PlanCase> = parse_jsonl(&fs::read_to_string(out.join("critique_plans.jsonl")).unwrap(), &out).unwrap();
    assert_eq!(cases.len(), 8);
    assert!(cases.iter().all(|c| c.error.is_some()));
}
