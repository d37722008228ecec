use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::pddl::{parse_domain, Atom, DomainDef, ProblemDef, State};
use super::plan::{GroundAction, Plan};

pub const BLOCKSWORLD_PDDL: &str = "\
(define (domain blocksworld)
  (:requirements :strips)
  (:predicates (on ?x ?y) (ontable ?x) (clear ?x) (handempty) (holding ?x))
  (:action pickup
    :parameters (?x)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty))))
  (:action putdown
    :parameters (?x)
    :precondition (holding ?x)
    :effect (and (ontable ?x) (clear ?x) (handempty) (not (holding ?x))))
  (:action stack
    :parameters (?x ?y)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x ?y)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty)))))
";

pub fn blocksworld_domain() -> DomainDef {
    parse_domain(BLOCKSWORLD_PDDL).expect("built-in domain parses")
}

/// Towers listed bottom to top.
pub type Towers = Vec<Vec<String>>;

pub fn state_of(towers: &Towers) -> State {
    let mut s = BTreeSet::new();
    s.insert(Atom::new("handempty", &[]));
    for t in towers {
        if let (Some(bottom), Some(top)) = (t.first(), t.last()) {
            s.insert(Atom::new("ontable", &[bottom]));
            s.insert(Atom::new("clear", &[top]));
        }
        for w in t.windows(2) {
            s.insert(Atom::new("on", &[&w[1], &w[0]]));
        }
    }
    s
}

/// Random arrangement: blocks in random order, each starting a new tower
/// or going on top of an existing one.
fn random_towers<R: Rng + ?Sized>(blocks: &[String], rng: &mut R) -> Towers {
    let mut order = blocks.to_vec();
    order.shuffle(rng);
    let mut towers: Towers = Vec::new();
    for b in order {
        let k = rng.gen_range(0..=towers.len());
        match towers.get_mut(k) {
            Some(t) => t.push(b),
            None => towers.push(alloc::vec![b]),
        }
    }
    towers
}

pub fn block_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let letter = char::from(b'a' + (i % 26) as u8);
            if i < 26 {
                letter.to_string()
            } else {
                format!("{letter}{}", i / 26)
            }
        })
        .collect()
}

/// A random problem with `n` blocks whose goal is the `on` relation of a
/// second random arrangement. Goals already true at the start are resampled.
pub fn generate_problem<R: Rng + ?Sized>(n: usize, name: &str, rng: &mut R) -> ProblemDef {
    let blocks = block_names(n);
    let init = state_of(&random_towers(&blocks, rng));
    let goal = loop {
        let g: BTreeSet<Atom> = state_of(&random_towers(&blocks, rng))
            .into_iter()
            .filter(|a| a.predicate == "on")
            .collect();
        if !g.is_empty() && !g.is_subset(&init) {
            break g;
        }
    };
    ProblemDef {
        name: name.to_string(),
        domain: "blocksworld".to_string(),
        objects: blocks,
        init,
        goal,
    }
}

fn towers_from_state(state: &State) -> Towers {
    let mut above: BTreeMap<&str, &str> = BTreeMap::new();
    for a in state.iter().filter(|a| a.predicate == "on") {
        above.insert(&a.args[1], &a.args[0]);
    }
    state
        .iter()
        .filter(|a| a.predicate == "ontable")
        .map(|a| {
            let mut t = alloc::vec![a.args[0].clone()];
            let mut cur = a.args[0].as_str();
            while let Some(next) = above.get(cur) {
                t.push(next.to_string());
                cur = next;
            }
            t
        })
        .collect()
}

/// Sound, non-optimal planner for Blocksworld problems whose initial state
/// is a set of towers with the hand empty and whose goal contains only
/// `on` atoms forming chains: put every block on the table, then build each
/// goal tower from the bottom up.
pub fn constructive_plan(problem: &ProblemDef) -> Plan {
    let mut steps = Vec::new();
    for tower in towers_from_state(&problem.init) {
        for w in tower.windows(2).rev() {
            steps.push(GroundAction::new("unstack", &[&w[1], &w[0]]));
            steps.push(GroundAction::new("putdown", &[&w[1]]));
        }
    }
    let mut above: BTreeMap<&str, &str> = BTreeMap::new();
    let mut has_below: BTreeSet<&str> = BTreeSet::new();
    for a in &problem.goal {
        if a.predicate == "on" {
            above.insert(&a.args[1], &a.args[0]);
            has_below.insert(&a.args[0]);
        }
    }
    for bottom in above.keys().filter(|b| !has_below.contains(*b)) {
        let mut cur = *bottom;
        while let Some(next) = above.get(cur) {
            steps.push(GroundAction::new("pickup", &[next]));
            steps.push(GroundAction::new("stack", &[next, cur]));
            cur = next;
        }
    }
    Plan { steps }
}

/// Every ground action of `domain` over the problem's objects, in a fixed order.
pub fn ground_actions(domain: &DomainDef, problem: &ProblemDef) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for schema in &domain.actions {
        let k = schema.parameters.len();
        let n = problem.objects.len();
        let total = n.pow(k as u32);
        for mut code in 0..total {
            let mut args = Vec::with_capacity(k);
            for _ in 0..k {
                args.push(problem.objects[code % n].clone());
                code /= n;
            }
            out.push(GroundAction {
                name: schema.name.clone(),
                args,
            });
        }
    }
    out
}
