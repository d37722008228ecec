use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::pddl::{Atom, DomainDef, ProblemDef, State};
use super::plan::{extract_plan, ExtractError, GroundAction, Plan};
use crate::harness::{Critique, FeedbackLevel, Verdict, VerdictSource};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanFault {
    /// `step_index` is 1-based.
    UnmetPrecondition {
        step_index: usize,
        action: String,
        missing_atoms: Vec<String>,
    },
    UnmetGoals {
        atoms: Vec<String>,
    },
    MalformedStep {
        step_index: usize,
        reason: String,
    },
}

fn atoms_text(atoms: &[String]) -> String {
    atoms.join(" ")
}

impl fmt::Display for PlanFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanFault::UnmetPrecondition {
                step_index,
                action,
                missing_atoms,
            } => {
                let name = action.trim_start_matches('(').split([' ', ')']).next().unwrap_or(action);
                write!(
                    f,
                    "Step {step_index} {action} is invalid because the {name} action requires {} to be true, which is not the case at that point.",
                    atoms_text(missing_atoms)
                )
            }
            PlanFault::UnmetGoals { atoms } => {
                write!(f, "This plan does not reach the goal. Unmet goals: {}", atoms_text(atoms))
            }
            PlanFault::MalformedStep { step_index, reason } => {
                write!(f, "Step {step_index} could not be understood: {reason}.")
            }
        }
    }
}

/// What to do when a step's preconditions do not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Stop at the first inexecutable step; goals are not checked.
    Halt,
    /// Record the fault, leave the state unchanged and continue.
    SkipInvalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    pub final_state: State,
    pub faults: Vec<PlanFault>,
}

impl SimResult {
    pub fn is_valid(&self) -> bool {
        self.faults.is_empty()
    }
}

/// Apply one step. Returns the missing preconditions on failure.
pub fn apply(domain: &DomainDef, state: &State, step: &GroundAction) -> Result<State, BTreeSet<Atom>> {
    let schema = domain.action(&step.name).expect("plan steps are resolved against the domain");
    let pre = schema.ground(&schema.preconditions, &step.args);
    let missing: BTreeSet<Atom> = pre.difference(state).cloned().collect();
    if !missing.is_empty() {
        return Err(missing);
    }
    let del = schema.ground(&schema.delete, &step.args);
    let add = schema.ground(&schema.add, &step.args);
    let mut next: State = state.difference(&del).cloned().collect();
    next.extend(add);
    Ok(next)
}

fn strings(atoms: impl IntoIterator<Item = Atom>) -> Vec<String> {
    atoms.into_iter().map(|a| format!("{a}")).collect()
}

/// Execute `plan` from the initial state and check the goal.
pub fn simulate(domain: &DomainDef, problem: &ProblemDef, plan: &Plan, mode: SimMode) -> SimResult {
    let mut state = problem.init.clone();
    let mut faults = Vec::new();
    for (i, step) in plan.steps.iter().enumerate() {
        match apply(domain, &state, step) {
            Ok(next) => state = next,
            Err(missing) => {
                faults.push(PlanFault::UnmetPrecondition {
                    step_index: i + 1,
                    action: format!("{step}"),
                    missing_atoms: strings(missing),
                });
                if mode == SimMode::Halt {
                    return SimResult {
                        final_state: state,
                        faults,
                    };
                }
            }
        }
    }
    let unmet: Vec<Atom> = problem.goal.difference(&state).cloned().collect();
    if !unmet.is_empty() {
        faults.push(PlanFault::UnmetGoals { atoms: strings(unmet) });
    }
    SimResult {
        final_state: state,
        faults,
    }
}

/// Faults of a plan given as model output text, at the requested detail.
/// First error and binary use halting semantics; all errors continues past
/// inexecutable steps so every mistaken action is reported.
pub fn plan_faults(domain: &DomainDef, problem: &ProblemDef, text: &str, level: FeedbackLevel) -> Vec<PlanFault> {
    let plan = match extract_plan(text, domain, problem) {
        Ok(p) => p,
        Err(ExtractError::NoPlan) => {
            return alloc::vec![PlanFault::MalformedStep {
                step_index: 1,
                reason: String::from("no plan steps were found"),
            }]
        }
        Err(ExtractError::BadStep { step_index, error }) => {
            return alloc::vec![PlanFault::MalformedStep {
                step_index,
                reason: format!("{error}"),
            }]
        }
    };
    let mode = match level {
        FeedbackLevel::AllErrors => SimMode::SkipInvalid,
        _ => SimMode::Halt,
    };
    simulate(domain, problem, &plan, mode).faults
}

pub fn verify_plan(domain: &DomainDef, problem: &ProblemDef, text: &str, level: FeedbackLevel) -> Verdict {
    let faults = plan_faults(domain, problem, text, level);
    if faults.is_empty() {
        return Verdict::accept(VerdictSource::SoundVerifier);
    }
    let items: Vec<String> = faults.iter().map(|f| format!("{f}")).collect();
    Verdict::reject(VerdictSource::SoundVerifier, Critique::from_faults(level, items))
}
