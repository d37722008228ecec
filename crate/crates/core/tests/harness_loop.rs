use std::cell::RefCell;

use backprompt_core::game24::{G24Instance, NumberRange};
use backprompt_core::harness::{
    ChatModel, Harness, ModelError, Payload, ProblemInstance, RecordEntry, RecordSink, RecordingModel, ReplayModel,
    ScriptedModel, TemplateSet,
};
use backprompt_core::metrics::{compute_confusion, compute_iteration_curve};
use backprompt_core::{FeedbackLevel, StopReason, Strategy, Transcript};

const RIGHT: &str = "(1+2+3)*4";
const WRONG: &str = "1+2+3+4";
const ALSO_RIGHT: &str = "1*2*3*4";

fn instance() -> ProblemInstance {
    let g = G24Instance::new(&[1, 2, 3, 4], NumberRange::default()).unwrap();
    ProblemInstance::new("g24-test", Payload::Game24(g))
}

fn sound(level: FeedbackLevel, rounds: u32) -> Strategy {
    Strategy::SoundCritique { level, max_rounds: rounds }
}

/// Generator script: `r - 1` wrong answers, then a right one.
fn correct_at(r: usize) -> ScriptedModel {
    ScriptedModel::new(std::iter::repeat_n(WRONG, r - 1).chain([RIGHT]))
}

fn run(strategy: Strategy, gen: &mut dyn ChatModel, ver: Option<&mut dyn ChatModel>) -> Transcript {
    let templates = TemplateSet::builtin();
    Harness::new(&templates).run_instance(strategy, &instance(), gen, ver).unwrap()
}

#[test]
fn sound_loop_stops_at_first_correct_round() {
    for r in 1..=15 {
        let mut gen = correct_at(r);
        let t = run(sound(FeedbackLevel::FirstError, 15), &mut gen, None);
        assert_eq!(t.rounds.len(), r);
        assert_eq!(t.stop_reason, StopReason::VerifierAccepted);
        assert_eq!(t.accepted_round(), Some(r));
        assert!(t.ground_truth_correct);
        assert_eq!(gen.remaining(), 0);
    }
}

#[test]
fn fifteen_round_budget_is_enforced() {
    let mut gen = ScriptedModel::new(std::iter::repeat_n(WRONG, 40));
    let t = run(sound(FeedbackLevel::FirstError, 15), &mut gen, None);
    assert_eq!(t.rounds.len(), 15);
    assert_eq!(t.stop_reason, StopReason::Timeout);
    assert!(!t.ground_truth_correct);
    assert_eq!(gen.remaining(), 25);
}

#[test]
fn backprompts_extend_the_previous_prompt() {
    let mut gen = correct_at(3);
    let t = run(sound(FeedbackLevel::Binary, 15), &mut gen, None);
    let base = &t.rounds[0].prompt;
    let feedback = "\n--- Feedback ---\nYour previous answer was wrong.\nTake this feedback into account and answer again in the same format.\n";
    let answer = format!("\n--- Proposed answer ---\n{WRONG}\n");
    assert_eq!(t.rounds[1].prompt, format!("{base}{answer}{feedback}"));
    assert_eq!(t.rounds[2].prompt, format!("{base}{answer}{feedback}{answer}{feedback}"));
    for w in t.rounds.windows(2) {
        assert!(w[1].prompt.starts_with(&w[0].prompt));
        assert!(w[1].prompt_tokens >= w[0].prompt_tokens);
    }
}

#[test]
fn first_error_critique_reaches_the_next_prompt() {
    let mut gen = correct_at(2);
    let t = run(sound(FeedbackLevel::FirstError, 15), &mut gen, None);
    let critique = t.rounds[0].verdict.as_ref().unwrap().critique.as_ref().unwrap();
    assert_eq!(critique.items.len(), 1);
    assert!(t.rounds[1].prompt.contains(&critique.rendered));
}

#[test]
fn sampling_repeats_the_base_prompt() {
    let mut gen = correct_at(6);
    let t = run(Strategy::Sampling { k: 10 }, &mut gen, None);
    assert_eq!(t.rounds.len(), 6);
    assert_eq!(t.stop_reason, StopReason::VerifierAccepted);
    assert!(t.rounds.iter().all(|r| r.prompt == t.rounds[0].prompt));
    assert!(t.rounds.iter().all(|r| r.prompt_tokens == t.rounds[0].prompt_tokens));
}

#[test]
fn self_consistency_takes_the_majority() {
    let mut gen = ScriptedModel::new([WRONG, RIGHT, "(1 + 2 + 3) * 4", WRONG, "Answer: (1+2+3)*4"]);
    let t = run(Strategy::SelfConsistency { k: 5 }, &mut gen, None);
    // Spacing and a leading label do not change the canonical form: three votes.
    assert_eq!(t.final_answer.as_ref().unwrap().round_index, 2);
    assert!(t.ground_truth_correct);
    assert_eq!(t.stop_reason, StopReason::Timeout);
}

#[test]
fn self_consistency_ties_go_to_the_earliest() {
    let mut gen = ScriptedModel::new([WRONG, RIGHT, RIGHT, WRONG]);
    let t = run(Strategy::SelfConsistency { k: 4 }, &mut gen, None);
    assert_eq!(t.final_answer.as_ref().unwrap().raw_text, WRONG);
    assert!(!t.ground_truth_correct);

    let mut gen = ScriptedModel::new(["no idea", "still no idea"]);
    let t = run(Strategy::SelfConsistency { k: 2 }, &mut gen, None);
    assert_eq!(t.final_answer.unwrap().raw_text, "no idea");
}

#[test]
fn standard_makes_one_call() {
    let mut gen = ScriptedModel::new([RIGHT, WRONG]);
    let t = run(Strategy::Standard, &mut gen, None);
    assert_eq!(t.rounds.len(), 1);
    assert!(t.ground_truth_correct);
    assert_eq!(gen.remaining(), 1);
}

#[test]
fn exhausted_script_is_a_generator_error() {
    let mut gen = ScriptedModel::new([WRONG, WRONG]);
    let t = run(sound(FeedbackLevel::Binary, 15), &mut gen, None);
    assert_eq!(t.stop_reason, StopReason::GeneratorError);
    assert_eq!(t.rounds.len(), 2);
    assert!(t.error.is_some());
}

#[test]
fn game24_rejects_all_errors_feedback() {
    let templates = TemplateSet::builtin();
    let r = Harness::new(&templates).run_instance(sound(FeedbackLevel::AllErrors, 15), &instance(), &mut correct_at(1), None);
    assert!(r.is_err());
}

#[test]
fn self_critique_needs_a_verifier() {
    let templates = TemplateSet::builtin();
    let mut gen = correct_at(1);
    let err = Harness::new(&templates).run_instance(Strategy::SelfCritique { max_rounds: 3 }, &instance(), &mut gen, None);
    assert!(err.is_err());
}

/// Round 1 right but rejected, round 2 wrong, round 3 right and accepted.
fn falsely_rejecting_run() -> Transcript {
    let mut gen = ScriptedModel::new([RIGHT, WRONG, ALSO_RIGHT]);
    let mut ver = ScriptedModel::new([
        "The expression uses 4 twice.\nVerdict: INCORRECT",
        "Verdict: INCORRECT",
        "Verdict: CORRECT",
    ]);
    run(Strategy::SelfCritique { max_rounds: 3 }, &mut gen, Some(&mut ver))
}

#[test]
fn llm_verifier_feedback_and_confusion() {
    let t = falsely_rejecting_run();
    assert_eq!(t.accepted_round(), Some(3));
    assert!(t.rounds[1].prompt.contains("The expression uses 4 twice."));
    assert!(t.rounds.iter().all(|r| r.verification.is_some()));
    let c = compute_confusion([&t]);
    // Round 1: valid rejected. Round 2: invalid rejected. Round 3: valid accepted.
    assert_eq!((c.tp, c.fn_, c.tn, c.fp), (1, 1, 1, 0));
}

#[test]
fn false_rejection_makes_the_curve_dip() {
    let t = falsely_rejecting_run();
    // Hand computed: round 1 answer right, round 2 wrong, accepted right at 3.
    assert_eq!(compute_iteration_curve(&[t], 3), vec![1.0, 0.0, 1.0]);
}

#[test]
fn sound_curves_never_decrease() {
    let mut transcripts = Vec::new();
    for (i, r) in [1usize, 3, 5, 8, 15, 16, 20].into_iter().enumerate() {
        let mut gen = if i % 2 == 0 { correct_at(r) } else { ScriptedModel::new(std::iter::repeat_n(WRONG, r)) };
        transcripts.push(run(sound(FeedbackLevel::FirstError, 15), &mut gen, None));
        let curve = compute_iteration_curve(&transcripts, 15);
        assert!(curve.windows(2).all(|w| w[0] <= w[1]), "{curve:?}");
    }
    let all_first: Vec<Transcript> = (0..5).map(|_| run(sound(FeedbackLevel::Binary, 15), &mut correct_at(1), None)).collect();
    assert!(compute_iteration_curve(&all_first, 15).iter().all(|&v| v == 1.0));
}

struct Sink<'a>(&'a RefCell<Vec<RecordEntry>>);

impl RecordSink for Sink<'_> {
    fn append(&self, entry: RecordEntry) -> Result<(), ModelError> {
        self.0.borrow_mut().push(entry);
        Ok(())
    }
}

#[test]
fn recorded_runs_replay_identically() {
    let log = RefCell::new(Vec::new());
    let original = {
        let mut gen = RecordingModel::new(correct_at(4), Sink(&log), "g24-test/generator");
        run(sound(FeedbackLevel::FirstError, 15), &mut gen, None)
    };
    let entries = log.into_inner();
    assert_eq!(entries.len(), 4);
    assert!(entries.iter().all(|e| e.temperature == 1.0));
    let mut replay = ReplayModel::new(entries.clone());
    let again = run(sound(FeedbackLevel::FirstError, 15), &mut replay, None);
    assert_eq!(serde_json::to_string(&original).unwrap(), serde_json::to_string(&again).unwrap());

    // A different feedback level changes the second prompt and breaks replay.
    let mut replay = ReplayModel::new(entries);
    let t = run(sound(FeedbackLevel::Binary, 15), &mut replay, None);
    assert_eq!(t.stop_reason, StopReason::GeneratorError);
    assert!(t.error.unwrap().contains("mismatch"));
}

#[test]
fn runs_are_deterministic() {
    let a = run(sound(FeedbackLevel::FirstError, 15), &mut correct_at(7), None);
    let b = run(sound(FeedbackLevel::FirstError, 15), &mut correct_at(7), None);
    assert_eq!(a, b);
}
