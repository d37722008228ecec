//! Scoring a model's plan critique against simulator ground truth.
//!
//! The expected response states `plan is valid` or `plan is invalid`; for an
//! invalid plan it names the kind (`inexecutable` or `non goal reaching`),
//! for an inexecutable plan the failing `step k` and the atoms after
//! `unmet precondition(s):`, and for a non-goal-reaching plan the atoms
//! after `unmet goal(s):`. Atoms are written `(pred arg ...)`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::simulate::PlanFault;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlanCritiqueScore {
    pub binary_ok: bool,
    pub type_ok: bool,
    pub critique_ok: bool,
    pub parse_failure: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Inexecutable,
    NonGoalReaching,
}

fn normalize_atom(inner: &str) -> String {
    let words: Vec<&str> = inner.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()).collect();
    let mut s = String::from("(");
    s.push_str(&words.join(" "));
    s.push(')');
    s
}

/// Parenthesized atoms following `marker`, up to the end of the paragraph.
fn atoms_after(text: &str, markers: &[&str]) -> Option<BTreeSet<String>> {
    let start = markers.iter().filter_map(|m| text.find(m).map(|i| i + m.len())).min()?;
    let rest = &text[start..];
    let rest = rest.split("\n\n").next().unwrap_or(rest);
    let mut out = BTreeSet::new();
    let mut from = 0;
    while let Some(open) = rest[from..].find('(') {
        let open = from + open;
        let Some(close) = rest[open..].find(')') else { break };
        let close = open + close;
        out.insert(normalize_atom(&rest[open + 1..close]));
        from = close + 1;
    }
    Some(out)
}

fn step_number(text: &str) -> Option<usize> {
    for marker in ["step ", "action "] {
        let mut from = 0;
        while let Some(i) = text[from..].find(marker) {
            let after = &text[from + i + marker.len()..];
            let digits: String = after.trim_start_matches(['#', ' ']).chars().take_while(char::is_ascii_digit).collect();
            if let Ok(n) = digits.parse() {
                return Some(n);
            }
            from += i + marker.len();
        }
    }
    None
}

fn ground_kind(faults: &[PlanFault]) -> Option<Kind> {
    match faults.first()? {
        PlanFault::UnmetGoals { .. } => Some(Kind::NonGoalReaching),
        _ => Some(Kind::Inexecutable),
    }
}

/// Score a critique given the halting-simulation faults of the plan.
pub fn score_llm_plan_critique(ground: &[PlanFault], llm_text: &str) -> PlanCritiqueScore {
    let text = llm_text.to_lowercase();
    let says_invalid = text.rfind("plan is invalid");
    let says_valid = text.rfind("plan is valid");
    let llm_valid = match (says_valid, says_invalid) {
        (None, None) => {
            return PlanCritiqueScore {
                parse_failure: true,
                ..Default::default()
            }
        }
        (Some(v), Some(i)) => v > i,
        (v, _) => v.is_some(),
    };
    let truth = ground_kind(ground);
    let binary_ok = llm_valid == truth.is_none();
    let Some(truth) = truth else {
        return PlanCritiqueScore {
            binary_ok,
            type_ok: binary_ok,
            critique_ok: binary_ok,
            parse_failure: false,
        };
    };
    if llm_valid {
        return PlanCritiqueScore::default();
    }
    let inexec = text.contains("inexecutable") || text.contains("not executable");
    let non_goal = ["non goal reaching", "non-goal-reaching", "non goal-reaching", "not goal reaching", "does not reach the goal"]
        .iter()
        .any(|m| text.contains(m));
    let llm_kind = match (inexec, non_goal) {
        (true, false) => Some(Kind::Inexecutable),
        (false, true) => Some(Kind::NonGoalReaching),
        _ => None,
    };
    let type_ok = llm_kind == Some(truth);
    let critique_ok = type_ok
        && match &ground[0] {
            PlanFault::UnmetPrecondition {
                step_index,
                missing_atoms,
                ..
            } => {
                let expected: BTreeSet<String> = missing_atoms.iter().cloned().collect();
                step_number(&text) == Some(*step_index)
                    && atoms_after(&text, &["unmet precondition"]) == Some(expected)
            }
            PlanFault::UnmetGoals { atoms } => {
                let expected: BTreeSet<String> = atoms.iter().cloned().collect();
                atoms_after(&text, &["unmet goal"]) == Some(expected)
            }
            PlanFault::MalformedStep { .. } => false,
        };
    PlanCritiqueScore {
        binary_ok,
        type_ok,
        critique_ok,
        parse_failure: false,
    }
}
