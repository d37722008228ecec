//! Verification and critique quality studies on synthetic candidates of
//! known ground truth: Game of 24 evaluation vs verification, coloring
//! critique hallucinations and plan critique accuracy.

use std::fmt::Write as _;

use backprompt_core::coloring::{
    classify_critique, coloring_faults, generate_coloring_suite, parse_llm_critique, verify_coloring, Coloring,
    ColoringFault, ColoringInstance, CritiqueClaim, CritiqueClassification, HallucinationClass, VerifyOptions,
};
use backprompt_core::game24::{generate_expression_suite, solve_brute_force, stated_value, Expr, NumberRange};
use backprompt_core::harness::{
    extract_verdict, ChatModel, DomainTag, Payload, ProblemInstance, RecordingModel, TemplateSet, VerifyVariant,
    VERIFICATION_TEMPERATURE,
};
use backprompt_core::metrics::rate_cell;
use backprompt_core::strips::{generate_plan_suite, plan_faults, score_llm_plan_critique, Plan, PlanCritiqueScore, PlanFault};
use backprompt_core::FeedbackLevel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Role;
use crate::runner::par_map;
use crate::store::{to_jsonl, MemorySink};

/// Shared inputs of every study.
pub struct EvalContext<'a> {
    pub templates: &'a TemplateSet,
    pub role: &'a Role,
    pub sink: &'a MemorySink,
    pub seed: u64,
    pub concurrency: usize,
    pub variant: VerifyVariant,
    pub number_max: i64,
}

impl EvalContext<'_> {
    /// One recorded verification query. Transport errors come back as `Err`.
    fn ask(&self, stream: String, prompt: &str) -> Result<String, String> {
        let mut model = RecordingModel::new(self.role.session(&stream), self.sink.clone(), stream);
        model
            .complete(prompt, VERIFICATION_TEMPERATURE)
            .map(|c| c.text)
            .map_err(|e| e.to_string())
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

/// `a/b (x%)` with up to two decimals.
pub fn fraction_cell(num: u64, den: u64) -> String {
    if den == 0 {
        return format!("{num}/{den} (n/a)");
    }
    let pct = format!("{:.2}", num as f64 * 100.0 / den as f64);
    let pct = pct.trim_end_matches('0').trim_end_matches('.');
    format!("{num}/{den} ({pct}%)")
}

fn group<'c, C>(cases: &'c [C], kinds: &[&str], kind_of: impl Fn(&C) -> &str) -> Vec<(String, Vec<&'c C>)> {
    kinds
        .iter()
        .map(|k| (k.to_string(), cases.iter().filter(|c| kind_of(c) == *k).collect()))
        .collect()
}

// ---------------------------------------------------------------- game24

pub const GAME24_KINDS: [&str; 6] = [
    "correct",
    "correct-no-info",
    "ablated_op",
    "ablated_number",
    "random",
    "random-no-info",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Game24Case {
    pub instance_id: String,
    pub kind: String,
    pub expression: String,
    pub valid: bool,
    pub value: String,
    pub response: String,
    /// The stated value matches the exact value.
    pub evaluation_ok: bool,
    /// Absent for the no-info kinds, which ask for no verdict.
    pub verification_ok: Option<bool>,
    pub error: Option<String>,
}

pub fn eval_game24(instances: &[ProblemInstance], ctx: &EvalContext<'_>) -> Vec<Game24Case> {
    let range = NumberRange { min: 1, max: ctx.number_max };
    let t = &ctx.templates.game24;
    let per_instance = par_map(instances, ctx.concurrency, |i, inst| {
        let Payload::Game24(g) = &inst.payload else { return Vec::new() };
        let Some(solution) = solve_brute_force(g) else { return Vec::new() };
        let Ok(suite) = generate_expression_suite(g, &solution, range, &mut ctx.rng(i)) else {
            return Vec::new();
        };
        let pick = |kind: &str| -> &Expr {
            match kind {
                "correct" | "correct-no-info" => &suite.correct,
                "ablated_op" => &suite.ablated_op,
                "ablated_number" => &suite.ablated_number,
                _ => &suite.random,
            }
        };
        GAME24_KINDS
            .iter()
            .map(|kind| {
                let expr = pick(kind);
                let text = expr.to_string();
                let no_info = kind.ends_with("no-info");
                let prompt = if no_info {
                    t.optional("evaluate_noinfo", &[("candidate", &text)])
                        .unwrap_or_else(|_| format!("Evaluate: {text}\nValue: "))
                } else {
                    t.verify(VerifyVariant::Cot, &inst.describe(), &text)
                };
                let value = expr.evaluate();
                let valid = !no_info && value.is(24) && *kind == "correct";
                let (response, error) = match ctx.ask(format!("{}/{kind}", inst.id), &prompt) {
                    Ok(r) => (r, None),
                    Err(e) => (String::new(), Some(e)),
                };
                Game24Case {
                    instance_id: inst.id.clone(),
                    kind: kind.to_string(),
                    expression: text,
                    valid,
                    value: value.to_string(),
                    evaluation_ok: stated_value(&response).is_some_and(|s| s.matches(&value)),
                    verification_ok: (!no_info).then(|| extract_verdict(&response) == Some(valid)),
                    response,
                    error,
                }
            })
            .collect()
    });
    per_instance.into_iter().flatten().collect()
}

pub fn game24_table(cases: &[Game24Case]) -> String {
    let mut s = String::from("| Expression type | Correct evaluation | Correct verification |\n|---|---|---|\n");
    for (kind, rows) in group(cases, &GAME24_KINDS, |c| &c.kind) {
        let n = rows.len() as u64;
        let eval = rows.iter().filter(|c| c.evaluation_ok).count() as u64;
        let ver = if kind.ends_with("no-info") {
            "-".to_string()
        } else {
            rate_cell(rows.iter().filter(|c| c.verification_ok == Some(true)).count() as u64, n)
        };
        let _ = writeln!(s, "| {kind} | {} | {ver} |", rate_cell(eval, n));
    }
    s
}

// -------------------------------------------------------------- coloring

pub const COLORING_KINDS: [&str; 4] = ["correct", "ablated", "non_optimal", "random"];

const PALETTE: [&str; 12] = [
    "red", "green", "blue", "yellow", "purple", "orange", "pink", "brown", "cyan", "magenta", "gray", "teal",
];

/// Replace numeric color labels by color names.
pub fn named_colors(c: &Coloring) -> Coloring {
    Coloring {
        assignment: c
            .assignment
            .iter()
            .map(|(v, col)| {
                let name = match col.parse::<usize>() {
                    Ok(i) if i < PALETTE.len() => PALETTE[i].to_string(),
                    Ok(i) => format!("color{i}"),
                    Err(_) => col.clone(),
                };
                (*v, name)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringCase {
    pub instance_id: String,
    pub kind: String,
    pub coloring: String,
    pub valid: bool,
    /// Edges whose endpoints share a color.
    pub error_edges: usize,
    pub response: String,
    pub verification_ok: bool,
    pub claims: Vec<CritiqueClaim>,
    pub label: HallucinationClass,
    pub parse_failure: bool,
    pub error: Option<String>,
}

/// Verdict, extracted claims and hallucination label of one verifier reply.
/// Claims are only read from replies that do not accept the coloring.
pub fn label_coloring_response(
    instance: &ColoringInstance,
    coloring: &Coloring,
    response: &str,
) -> (Option<bool>, Vec<CritiqueClaim>, CritiqueClassification) {
    let verdict = extract_verdict(response);
    let rejected = verdict != Some(true);
    let claims = if rejected { parse_llm_critique(response) } else { Vec::new() };
    let cls = classify_critique(instance, coloring, &claims, rejected);
    (verdict, claims, cls)
}

pub fn eval_coloring(instances: &[ProblemInstance], ctx: &EvalContext<'_>) -> Vec<ColoringCase> {
    let t = &ctx.templates.coloring;
    let per_instance = par_map(instances, ctx.concurrency, |i, inst| {
        let Payload::Coloring(ci) = &inst.payload else { return Vec::new() };
        let Ok(suite) = generate_coloring_suite(ci, &mut ctx.rng(i)) else { return Vec::new() };
        let lenient = VerifyOptions { reject_non_optimal: false };
        COLORING_KINDS
            .iter()
            .map(|kind| {
                let raw = match *kind {
                    "correct" => &suite.correct,
                    "ablated" => &suite.ablated,
                    "non_optimal" => &suite.non_optimal,
                    _ => &suite.random,
                };
                let coloring = named_colors(raw);
                let rendered = coloring.render();
                let valid = verify_coloring(ci, &coloring, FeedbackLevel::Binary, VerifyOptions::default()).accepted;
                let error_edges = coloring_faults(ci, &coloring, lenient)
                    .iter()
                    .filter(|f| matches!(f, ColoringFault::EdgeConflict { .. }))
                    .count();
                let prompt = t.verify(ctx.variant, &inst.describe(), rendered.trim_end());
                let (response, error) = match ctx.ask(format!("{}/{kind}", inst.id), &prompt) {
                    Ok(r) => (r, None),
                    Err(e) => (String::new(), Some(e)),
                };
                let (verdict, claims, cls) = label_coloring_response(ci, &coloring, &response);
                ColoringCase {
                    instance_id: inst.id.clone(),
                    kind: kind.to_string(),
                    coloring: rendered,
                    valid,
                    error_edges,
                    verification_ok: verdict.unwrap_or(false) == valid,
                    response,
                    claims,
                    label: cls.label,
                    parse_failure: cls.parse_failure,
                    error,
                }
            })
            .collect()
    });
    per_instance.into_iter().flatten().collect()
}

/// One hallucination label per coloring. `None` includes rejections whose
/// critique named no checkable pair; those are also counted under
/// `Unparsed`.
pub fn coloring_table(cases: &[ColoringCase]) -> String {
    let mut s = String::from(
        "| Coloring type | Vertex | Edge | Both | None | Unparsed | Errors | Correct | Verified |\n|---|---|---|---|---|---|---|---|---|\n",
    );
    let mut totals = [0u64; 8];
    for (kind, rows) in group(cases, &COLORING_KINDS, |c| &c.kind) {
        let count = |l| rows.iter().filter(|c| c.label == l).count() as u64;
        let row = [
            count(HallucinationClass::Vertex),
            count(HallucinationClass::Edge),
            count(HallucinationClass::Both),
            count(HallucinationClass::None),
            rows.iter().filter(|c| c.parse_failure).count() as u64,
            rows.iter().map(|c| c.error_edges as u64).sum(),
            rows.iter().filter(|c| c.valid).count() as u64,
            rows.iter().filter(|c| c.verification_ok).count() as u64,
        ];
        for (t, v) in totals.iter_mut().zip(row) {
            *t += v;
        }
        let _ = writeln!(
            s,
            "| {kind} | {} | {} | {} | {} | {} | {} | {} | {} |",
            row[0],
            row[1],
            row[2],
            row[3],
            row[4],
            row[5],
            row[6],
            fraction_cell(row[7], rows.len() as u64)
        );
    }
    let _ = writeln!(
        s,
        "| total | {} | {} | {} | {} | {} | {} | {} | {} |",
        totals[0],
        totals[1],
        totals[2],
        totals[3],
        totals[4],
        totals[5],
        totals[6],
        fraction_cell(totals[7], cases.len() as u64)
    );
    s
}

// ----------------------------------------------------------------- plans

pub const PLAN_KINDS: [&str; 4] = ["correct", "inexecutable", "non_goal_reaching", "random"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCase {
    pub instance_id: String,
    pub kind: String,
    pub plan: String,
    /// Halting-simulation faults: empty for a valid plan.
    pub ground: Vec<PlanFault>,
    pub response: String,
    pub score: PlanCritiqueScore,
    pub error: Option<String>,
}

pub fn eval_plans(instances: &[ProblemInstance], ctx: &EvalContext<'_>) -> Vec<PlanCase> {
    let t = &ctx.templates.strips;
    let per_instance = par_map(instances, ctx.concurrency, |i, inst| {
        let Payload::Strips(si) = &inst.payload else { return Vec::new() };
        let Ok(suite) = generate_plan_suite(&si.domain, &si.problem, &mut ctx.rng(i)) else {
            return Vec::new();
        };
        PLAN_KINDS
            .iter()
            .map(|kind| {
                let plan: &Plan = match *kind {
                    "correct" => &suite.correct,
                    "inexecutable" => &suite.inexecutable,
                    "non_goal_reaching" => &suite.non_goal_reaching,
                    _ => &suite.random,
                };
                let text = plan.render();
                let ground = plan_faults(&si.domain, &si.problem, &text, FeedbackLevel::FirstError);
                let prompt = t
                    .optional("verify_format", &[("instance", &inst.describe()), ("candidate", text.trim_end())])
                    .unwrap_or_else(|_| t.verify(ctx.variant, &inst.describe(), text.trim_end()));
                let (response, error) = match ctx.ask(format!("{}/{kind}", inst.id), &prompt) {
                    Ok(r) => (r, None),
                    Err(e) => (String::new(), Some(e)),
                };
                PlanCase {
                    instance_id: inst.id.clone(),
                    kind: kind.to_string(),
                    plan: text,
                    score: score_llm_plan_critique(&ground, &response),
                    ground,
                    response,
                    error,
                }
            })
            .collect()
    });
    per_instance.into_iter().flatten().collect()
}

pub fn plan_table(cases: &[PlanCase]) -> String {
    let mut s = String::from("| Plan type | Binary verification | Type identified | Critique generation |\n|---|---|---|---|\n");
    for (kind, rows) in group(cases, &PLAN_KINDS, |c| &c.kind) {
        let n = rows.len() as u64;
        let count = |f: fn(&PlanCritiqueScore) -> bool| rows.iter().filter(|c| f(&c.score)).count() as u64;
        let _ = writeln!(
            s,
            "| {kind} | {} | {} | {} |",
            fraction_cell(count(|s| s.binary_ok), n),
            fraction_cell(count(|s| s.type_ok), n),
            fraction_cell(count(|s| s.critique_ok), n)
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSuite {
    Game24,
    Coloring,
    Plans,
}

impl EvalSuite {
    pub fn domain(self) -> DomainTag {
        match self {
            EvalSuite::Game24 => DomainTag::Game24,
            EvalSuite::Coloring => DomainTag::Coloring,
            EvalSuite::Plans => DomainTag::Strips,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EvalSuite::Game24 => "game24",
            EvalSuite::Coloring => "coloring",
            EvalSuite::Plans => "plans",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub markdown: String,
    /// One JSON object per evaluated candidate.
    pub cases_jsonl: String,
    pub cases: usize,
    pub transport_errors: usize,
}

/// Run one study and render its summary table.
pub fn run_eval(suite: EvalSuite, instances: &[ProblemInstance], ctx: &EvalContext<'_>) -> EvalOutput {
    let (table, cases_jsonl, cases, transport_errors) = match suite {
        EvalSuite::Game24 => {
            let c = eval_game24(instances, ctx);
            (game24_table(&c), to_jsonl(&c), c.len(), c.iter().filter(|c| c.error.is_some()).count())
        }
        EvalSuite::Coloring => {
            let c = eval_coloring(instances, ctx);
            (coloring_table(&c), to_jsonl(&c), c.len(), c.iter().filter(|c| c.error.is_some()).count())
        }
        EvalSuite::Plans => {
            let c = eval_plans(instances, ctx);
            (plan_table(&c), to_jsonl(&c), c.len(), c.iter().filter(|c| c.error.is_some()).count())
        }
    };
    let mut markdown = format!("# Critique evaluation: {}

", suite.name());
    let _ = writeln!(markdown, "- seed: {}", ctx.seed);
    let _ = writeln!(markdown, "- template_set: {}", ctx.templates.id);
    let _ = writeln!(markdown, "- instances: {}", instances.len());
    let _ = writeln!(markdown, "- cases: {cases}");
    let _ = writeln!(markdown, "- transport_errors: {transport_errors}\n");
    markdown.push_str(&table);
    EvalOutput {
        markdown,
        cases_jsonl,
        cases,
        transport_errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_cells_match_table_style() {
        assert_eq!(fraction_cell(78, 100), "78/100 (78%)");
        assert_eq!(fraction_cell(53, 55), "53/55 (96.36%)");
        assert_eq!(fraction_cell(25, 40), "25/40 (62.5%)");
        assert_eq!(fraction_cell(12, 89), "12/89 (13.48%)");
        assert_eq!(fraction_cell(0, 0), "0/0 (n/a)");
    }

    #[test]
    fn numeric_colors_get_names() {
        let c = named_colors(&Coloring::from_indices(&[0, 2, 1, 13]));
        assert_eq!(c.color(0), Some("red"));
        assert_eq!(c.color(1), Some("blue"));
        assert_eq!(c.color(3), Some("color13"));
    }
}
