use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::blocksworld::{constructive_plan, ground_actions};
use super::pddl::{DomainDef, ProblemDef};
use super::plan::Plan;
use super::simulate::{apply, simulate, SimMode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanSuiteError {
    #[error("the constructive plan does not solve the problem")]
    PlannerFailed,
    #[error("no inexecutable replacement step exists")]
    NoInexecutable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanSuite {
    pub correct: Plan,
    pub inexecutable: Plan,
    /// 1-based index of the step made inexecutable.
    pub injected_step: usize,
    pub non_goal_reaching: Plan,
    pub random: Plan,
}

/// Build the four plan kinds from the constructive planner's solution.
pub fn generate_plan_suite<R: Rng + ?Sized>(
    domain: &DomainDef,
    problem: &ProblemDef,
    rng: &mut R,
) -> Result<PlanSuite, PlanSuiteError> {
    let correct = constructive_plan(problem);
    if !simulate(domain, problem, &correct, SimMode::Halt).is_valid() {
        return Err(PlanSuiteError::PlannerFailed);
    }
    let mut states = Vec::with_capacity(correct.steps.len() + 1);
    states.push(problem.init.clone());
    for step in &correct.steps {
        let next = apply(domain, states.last().expect("nonempty"), step).map_err(|_| PlanSuiteError::PlannerFailed)?;
        states.push(next);
    }
    let universe = ground_actions(domain, problem);

    // Replace one step with an action that cannot run in the state before it.
    let mut positions: Vec<usize> = (0..correct.steps.len()).collect();
    positions.shuffle(rng);
    let mut injected = None;
    for i in positions {
        let bad: Vec<_> = universe.iter().filter(|a| apply(domain, &states[i], a).is_err()).collect();
        if let Some(a) = bad.choose(rng) {
            let mut plan = correct.clone();
            plan.steps[i] = (*a).clone();
            injected = Some((plan, i + 1));
            break;
        }
    }
    let (inexecutable, injected_step) = injected.ok_or(PlanSuiteError::NoInexecutable)?;

    // Executable prefix that leaves the goal unmet; prefer a nonempty one.
    let unmet: Vec<usize> = (0..correct.steps.len())
        .filter(|&len| !problem.goal.is_subset(&states[len]))
        .collect();
    let nonempty: Vec<usize> = unmet.iter().copied().filter(|&l| l > 0).collect();
    let len = *nonempty.choose(rng).or(unmet.first()).unwrap_or(&0);
    let non_goal_reaching = Plan {
        steps: correct.steps[..len].to_vec(),
    };

    let random = Plan {
        steps: (0..correct.steps.len())
            .filter_map(|_| universe.choose(rng).cloned())
            .collect(),
    };
    Ok(PlanSuite {
        correct,
        inexecutable,
        injected_step,
        non_goal_reaching,
        random,
    })
}
