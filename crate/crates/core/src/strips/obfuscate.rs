use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::pddl::{ActionSchema, Atom, DomainDef, ProblemDef};
use super::plan::{GroundAction, Plan};
use super::simulate::PlanFault;

/// Renaming of predicate and action names. Object names are left alone.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObfuscationMap {
    pub predicates: BTreeMap<String, String>,
    pub actions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObfuscationError {
    #[error("no alias for {kind} '{name}'")]
    Missing { kind: &'static str, name: String },
    #[error("alias '{alias}' is used for more than one {kind}")]
    NotInjective { kind: &'static str, alias: String },
}

fn pairs(items: &[(&str, &str)]) -> BTreeMap<String, String> {
    items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn check_injective(map: &BTreeMap<String, String>, kind: &'static str) -> Result<(), ObfuscationError> {
    let mut seen = BTreeSet::new();
    for alias in map.values() {
        if !seen.insert(alias) {
            return Err(ObfuscationError::NotInjective {
                kind,
                alias: alias.clone(),
            });
        }
    }
    Ok(())
}

fn lookup<'a>(map: &'a BTreeMap<String, String>, name: &str, kind: &'static str) -> Result<&'a str, ObfuscationError> {
    map.get(name).map(String::as_str).ok_or_else(|| ObfuscationError::Missing {
        kind,
        name: name.to_string(),
    })
}

impl ObfuscationMap {
    /// The Mystery Blocksworld vocabulary.
    pub fn mystery_blocksworld() -> Self {
        Self {
            predicates: pairs(&[
                ("on", "craves"),
                ("ontable", "planet"),
                ("clear", "province"),
                ("handempty", "harmony"),
                ("holding", "pain"),
            ]),
            actions: pairs(&[
                ("pickup", "attack"),
                ("putdown", "succumb"),
                ("stack", "overcome"),
                ("unstack", "feast"),
            ]),
        }
    }

    pub fn identity(domain: &DomainDef) -> Self {
        Self {
            predicates: domain.predicates.keys().map(|p| (p.clone(), p.clone())).collect(),
            actions: domain.actions.iter().map(|a| (a.name.clone(), a.name.clone())).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let flip = |m: &BTreeMap<String, String>| m.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
        Self {
            predicates: flip(&self.predicates),
            actions: flip(&self.actions),
        }
    }

    /// Check that every name in `domain` has an alias and that aliases are distinct.
    pub fn validate(&self, domain: &DomainDef) -> Result<(), ObfuscationError> {
        check_injective(&self.predicates, "predicate")?;
        check_injective(&self.actions, "action")?;
        for p in domain.predicates.keys() {
            lookup(&self.predicates, p, "predicate")?;
        }
        for a in &domain.actions {
            lookup(&self.actions, &a.name, "action")?;
        }
        Ok(())
    }

    fn atom(&self, a: &Atom) -> Atom {
        Atom {
            predicate: self.predicates.get(&a.predicate).cloned().unwrap_or_else(|| a.predicate.clone()),
            args: a.args.clone(),
        }
    }

    fn atoms(&self, set: &BTreeSet<Atom>) -> BTreeSet<Atom> {
        set.iter().map(|a| self.atom(a)).collect()
    }

    fn step(&self, s: &GroundAction) -> GroundAction {
        GroundAction {
            name: self.actions.get(&s.name).cloned().unwrap_or_else(|| s.name.clone()),
            args: s.args.clone(),
        }
    }

    pub fn plan(&self, plan: &Plan) -> Plan {
        Plan {
            steps: plan.steps.iter().map(|s| self.step(s)).collect(),
        }
    }

    /// Rename the head of a rendered `(name args...)` term using `map`.
    fn rename_term(map: &BTreeMap<String, String>, text: &str) -> String {
        let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
        let mut words = inner.split_whitespace();
        let Some(head) = words.next() else {
            return text.to_string();
        };
        let head = map.get(head).map_or(head, String::as_str);
        let rest: Vec<&str> = words.collect();
        if rest.is_empty() {
            format!("({head})")
        } else {
            format!("({head} {})", rest.join(" "))
        }
    }

    pub fn fault(&self, fault: &PlanFault) -> PlanFault {
        let atoms = |v: &[String]| -> Vec<String> {
            let mut out: Vec<String> = v.iter().map(|a| Self::rename_term(&self.predicates, a)).collect();
            out.sort();
            out
        };
        match fault {
            PlanFault::UnmetPrecondition {
                step_index,
                action,
                missing_atoms,
            } => PlanFault::UnmetPrecondition {
                step_index: *step_index,
                action: Self::rename_term(&self.actions, action),
                missing_atoms: atoms(missing_atoms),
            },
            PlanFault::UnmetGoals { atoms: goal } => PlanFault::UnmetGoals { atoms: atoms(goal) },
            other => other.clone(),
        }
    }
}

/// Rename a domain and problem. The map must cover every name in the domain.
pub fn obfuscate(
    domain: &DomainDef,
    problem: &ProblemDef,
    map: &ObfuscationMap,
) -> Result<(DomainDef, ProblemDef), ObfuscationError> {
    map.validate(domain)?;
    let d = DomainDef {
        name: domain.name.clone(),
        predicates: domain
            .predicates
            .iter()
            .map(|(p, &n)| (map.predicates[p].clone(), n))
            .collect(),
        actions: domain
            .actions
            .iter()
            .map(|a| ActionSchema {
                name: map.actions[&a.name].clone(),
                parameters: a.parameters.clone(),
                preconditions: map.atoms(&a.preconditions),
                add: map.atoms(&a.add),
                delete: map.atoms(&a.delete),
            })
            .collect(),
    };
    let p = ProblemDef {
        name: problem.name.clone(),
        domain: problem.domain.clone(),
        objects: problem.objects.clone(),
        init: map.atoms(&problem.init),
        goal: map.atoms(&problem.goal),
    };
    Ok((d, p))
}

/// Map a plan written in obfuscated names back to the original names.
pub fn deobfuscate_plan(plan: &Plan, map: &ObfuscationMap) -> Plan {
    map.inverse().plan(plan)
}
