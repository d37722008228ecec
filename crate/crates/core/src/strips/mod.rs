//! STRIPS planning: a PDDL subset, a plan simulator used as a sound
//! validator, Blocksworld instances and name obfuscation.

mod blocksworld;
mod critique;
mod obfuscate;
mod pddl;
mod plan;
mod sexpr;
mod simulate;
mod suite;

pub use blocksworld::{
    block_names, blocksworld_domain, constructive_plan, generate_problem, ground_actions, state_of, Towers,
    BLOCKSWORLD_PDDL,
};
pub use critique::{score_llm_plan_critique, PlanCritiqueScore};
pub use obfuscate::{deobfuscate_plan, obfuscate, ObfuscationError, ObfuscationMap};
pub use pddl::{
    domain_to_pddl, parse_domain, parse_problem, problem_to_pddl, ActionSchema, Atom, DomainDef, PddlError, ProblemDef,
    State,
};
pub use plan::{extract_plan, parse_plan, parse_step, ExtractError, GroundAction, Plan, PlanParseError, StepError};
pub use sexpr::{parse_sexpr, Pos, SExpr, SExprError};
pub use simulate::{apply, plan_faults, simulate, verify_plan, PlanFault, SimMode, SimResult};
pub use suite::{generate_plan_suite, PlanSuite, PlanSuiteError};

/// A planning task: domain and problem share one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripsInstance {
    pub domain: DomainDef,
    pub problem: ProblemDef,
}

impl StripsInstance {
    /// PDDL text of the domain followed by the problem, as shown to the model.
    pub fn describe(&self) -> alloc::string::String {
        let mut s = domain_to_pddl(&self.domain);
        s.push('\n');
        s.push_str(&problem_to_pddl(&self.problem));
        s
    }
}
