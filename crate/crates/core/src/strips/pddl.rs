use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::sexpr::{parse_sexpr, Pos, SExpr, SExprError};

/// A predicate applied to arguments. In schemas the arguments are
/// `?variables`; in states and goals they are object names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        Self {
            predicate: predicate.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

pub type State = BTreeSet<Atom>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<String>,
    pub preconditions: BTreeSet<Atom>,
    pub add: BTreeSet<Atom>,
    pub delete: BTreeSet<Atom>,
}

impl ActionSchema {
    /// Substitute `args` for the parameters in `atoms`.
    pub fn ground(&self, atoms: &BTreeSet<Atom>, args: &[String]) -> BTreeSet<Atom> {
        let binding: BTreeMap<&str, &str> = self
            .parameters
            .iter()
            .map(String::as_str)
            .zip(args.iter().map(String::as_str))
            .collect();
        atoms
            .iter()
            .map(|a| Atom {
                predicate: a.predicate.clone(),
                args: a.args.iter().map(|v| binding.get(v.as_str()).copied().unwrap_or(v).to_string()).collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainDef {
    pub name: String,
    /// Predicate name to arity.
    pub predicates: BTreeMap<String, usize>,
    pub actions: Vec<ActionSchema>,
}

impl DomainDef {
    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDef {
    pub name: String,
    pub domain: String,
    pub objects: Vec<String>,
    pub init: State,
    pub goal: BTreeSet<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PddlError {
    #[error(transparent)]
    Syntax(#[from] SExprError),
    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
}

fn invalid<T>(pos: Pos, message: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Invalid {
        pos,
        message: message.into(),
    })
}

fn atom_str<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom()
        .map_or_else(|| invalid(e.pos(), format!("expected {what}, found a list")), Ok)
}

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], PddlError> {
    e.as_list()
        .map_or_else(|| invalid(e.pos(), format!("expected {what}, found a symbol")), Ok)
}

/// `(define (<kind> <name>) sections...)`; returns the name and sections.
fn define<'a>(e: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr]), PddlError> {
    let items = list(e, "(define ...)")?;
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return invalid(e.pos(), "expected (define ...)");
    }
    let header = items.get(1).map_or_else(|| invalid(e.pos(), "missing header"), |h| list(h, "header"))?;
    match header {
        [k, name] if k.as_atom() == Some(kind) => Ok((atom_str(name, "a name")?.to_string(), &items[2..])),
        _ => invalid(items[1].pos(), format!("expected ({kind} <name>)")),
    }
}

fn section(e: &SExpr) -> Result<(&str, &[SExpr]), PddlError> {
    let items = list(e, "a section")?;
    match items.split_first() {
        Some((head, rest)) => match head.as_atom() {
            Some(k) if k.starts_with(':') => Ok((k, rest)),
            _ => invalid(head.pos(), "expected a :keyword"),
        },
        None => invalid(e.pos(), "empty section"),
    }
}

fn parse_atom(e: &SExpr) -> Result<Atom, PddlError> {
    let items = list(e, "an atom")?;
    let (head, rest) = items.split_first().map_or_else(|| invalid(e.pos(), "empty atom"), Ok)?;
    Ok(Atom {
        predicate: atom_str(head, "a predicate name")?.to_string(),
        args: rest.iter().map(|a| atom_str(a, "an argument").map(str::to_string)).collect::<Result<_, _>>()?,
    })
}

/// A single literal, `(and ...)`, or `()`; negations only where `allow_not`.
fn parse_conjunction(e: &SExpr, allow_not: bool) -> Result<Vec<(bool, Atom, Pos)>, PddlError> {
    let items = list(e, "a formula")?;
    let parts: &[SExpr] = match items.first().and_then(SExpr::as_atom) {
        Some("and") => &items[1..],
        None if items.is_empty() => &[],
        _ => core::slice::from_ref(e),
    };
    let mut out = Vec::new();
    for p in parts {
        let inner = list(p, "a literal")?;
        match inner.first().and_then(SExpr::as_atom) {
            Some("not") if allow_not => {
                let [_, a] = inner else {
                    return invalid(p.pos(), "(not ...) takes one atom");
                };
                out.push((false, parse_atom(a)?, p.pos()));
            }
            Some("not") => return invalid(p.pos(), "negative literals are not supported here"),
            Some("or" | "imply" | "forall" | "exists" | "when") => {
                return invalid(p.pos(), "only conjunctions of atoms are supported")
            }
            _ => out.push((true, parse_atom(p)?, p.pos())),
        }
    }
    Ok(out)
}

fn check_atom(
    atom: &Atom,
    pos: Pos,
    predicates: &BTreeMap<String, usize>,
    allowed_args: &BTreeSet<&str>,
) -> Result<(), PddlError> {
    match predicates.get(&atom.predicate) {
        None => invalid(pos, format!("unknown predicate '{}'", atom.predicate)),
        Some(&n) if n != atom.args.len() => invalid(
            pos,
            format!("predicate '{}' takes {n} arguments, given {}", atom.predicate, atom.args.len()),
        ),
        _ => match atom.args.iter().find(|a| !allowed_args.contains(a.as_str())) {
            Some(a) => invalid(pos, format!("unknown argument '{a}'")),
            None => Ok(()),
        },
    }
}

fn parse_action(rest: &[SExpr], pos: Pos, predicates: &BTreeMap<String, usize>) -> Result<ActionSchema, PddlError> {
    let (name, mut rest) = rest.split_first().map_or_else(|| invalid(pos, "action without a name"), Ok)?;
    let name = atom_str(name, "an action name")?.to_string();
    let mut schema = ActionSchema {
        name,
        parameters: Vec::new(),
        preconditions: BTreeSet::new(),
        add: BTreeSet::new(),
        delete: BTreeSet::new(),
    };
    let mut pre = Vec::new();
    let mut eff = Vec::new();
    while let [key, value, tail @ ..] = rest {
        match atom_str(key, "an action keyword")? {
            ":parameters" => {
                for p in list(value, "a parameter list")? {
                    let v = atom_str(p, "a variable")?;
                    if !v.starts_with('?') {
                        return invalid(p.pos(), format!("'{v}' is not a ?variable (typing is not supported)"));
                    }
                    if schema.parameters.iter().any(|q| q == v) {
                        return invalid(p.pos(), format!("duplicate parameter '{v}'"));
                    }
                    schema.parameters.push(v.to_string());
                }
            }
            ":precondition" => pre = parse_conjunction(value, false)?,
            ":effect" => eff = parse_conjunction(value, true)?,
            other => return invalid(key.pos(), format!("unsupported action keyword '{other}'")),
        }
        rest = tail;
    }
    if let [extra] = rest {
        return invalid(extra.pos(), "keyword without a value");
    }
    let vars: BTreeSet<&str> = schema.parameters.iter().map(String::as_str).collect();
    for (_, atom, p) in &pre {
        check_atom(atom, *p, predicates, &vars)?;
        schema.preconditions.insert(atom.clone());
    }
    for (positive, atom, p) in &eff {
        check_atom(atom, *p, predicates, &vars)?;
        let (set, other) = if *positive {
            (&mut schema.add, &schema.delete)
        } else {
            (&mut schema.delete, &schema.add)
        };
        if other.contains(atom) {
            return invalid(*p, format!("{atom} is both added and deleted"));
        }
        set.insert(atom.clone());
    }
    Ok(schema)
}

pub fn parse_domain(text: &str) -> Result<DomainDef, PddlError> {
    let top = parse_sexpr(text)?;
    let (name, sections) = define(&top, "domain")?;
    let mut domain = DomainDef {
        name,
        predicates: BTreeMap::new(),
        actions: Vec::new(),
    };
    for s in sections {
        let (key, rest) = section(s)?;
        match key {
            ":requirements" => {
                for r in rest {
                    if atom_str(r, "a requirement")? != ":strips" {
                        return invalid(r.pos(), "only :strips is supported");
                    }
                }
            }
            ":predicates" => {
                for p in rest {
                    let atom = parse_atom(p)?;
                    if domain.predicates.insert(atom.predicate.clone(), atom.args.len()).is_some() {
                        return invalid(p.pos(), format!("duplicate predicate '{}'", atom.predicate));
                    }
                }
            }
            ":action" => {
                let a = parse_action(rest, s.pos(), &domain.predicates)?;
                if domain.action(&a.name).is_some() {
                    return invalid(s.pos(), format!("duplicate action '{}'", a.name));
                }
                domain.actions.push(a);
            }
            other => return invalid(s.pos(), format!("unsupported section '{other}'")),
        }
    }
    Ok(domain)
}

pub fn parse_problem(text: &str, domain: &DomainDef) -> Result<ProblemDef, PddlError> {
    let top = parse_sexpr(text)?;
    let (name, sections) = define(&top, "problem")?;
    let mut problem = ProblemDef {
        name,
        domain: domain.name.clone(),
        objects: Vec::new(),
        init: BTreeSet::new(),
        goal: BTreeSet::new(),
    };
    let mut init = Vec::new();
    let mut goal = Vec::new();
    for s in sections {
        let (key, rest) = section(s)?;
        match key {
            ":domain" => {
                let [d] = rest else {
                    return invalid(s.pos(), "(:domain <name>) expected");
                };
                if atom_str(d, "a domain name")? != domain.name {
                    return invalid(d.pos(), format!("problem is for a different domain than '{}'", domain.name));
                }
            }
            ":objects" => {
                for o in rest {
                    let o_name = atom_str(o, "an object name")?;
                    if o_name == "-" {
                        return invalid(o.pos(), "typed objects are not supported");
                    }
                    if problem.objects.iter().any(|x| x == o_name) {
                        return invalid(o.pos(), format!("duplicate object '{o_name}'"));
                    }
                    problem.objects.push(o_name.to_string());
                }
            }
            ":init" => {
                for a in rest {
                    init.push((parse_atom(a)?, a.pos()));
                }
            }
            ":goal" => {
                let [g] = rest else {
                    return invalid(s.pos(), "(:goal <formula>) expected");
                };
                goal = parse_conjunction(g, false)?;
            }
            other => return invalid(s.pos(), format!("unsupported section '{other}'")),
        }
    }
    let objects: BTreeSet<&str> = problem.objects.iter().map(String::as_str).collect();
    for (a, p) in init {
        check_atom(&a, p, &domain.predicates, &objects)?;
        problem.init.insert(a);
    }
    for (_, a, p) in goal {
        check_atom(&a, p, &domain.predicates, &objects)?;
        problem.goal.insert(a);
    }
    Ok(problem)
}

fn conj(atoms: impl Iterator<Item = String>) -> String {
    let parts: Vec<String> = atoms.collect();
    format!("(and {})", parts.join(" "))
}

/// Render a domain back to PDDL text accepted by [`parse_domain`].
pub fn domain_to_pddl(d: &DomainDef) -> String {
    let mut out = format!("(define (domain {})\n  (:requirements :strips)\n  (:predicates", d.name);
    for (p, &arity) in &d.predicates {
        out.push_str(&format!(" ({p}"));
        for i in 0..arity {
            out.push_str(&format!(" ?x{i}"));
        }
        out.push(')');
    }
    out.push_str(")\n");
    for a in &d.actions {
        out.push_str(&format!(
            "  (:action {}\n    :parameters ({})\n    :precondition {}\n    :effect {})\n",
            a.name,
            a.parameters.join(" "),
            conj(a.preconditions.iter().map(|x| x.to_string())),
            conj(a.add.iter().map(|x| x.to_string()).chain(a.delete.iter().map(|x| format!("(not {x})")))),
        ));
    }
    out.push_str(")\n");
    out
}

pub fn problem_to_pddl(p: &ProblemDef) -> String {
    let mut out = format!(
        "(define (problem {})\n  (:domain {})\n  (:objects {})\n  (:init",
        p.name,
        p.domain,
        p.objects.join(" ")
    );
    for a in &p.init {
        out.push_str(&format!("\n    {a}"));
    }
    out.push_str(&format!(")\n  (:goal {}))\n", conj(p.goal.iter().map(|x| x.to_string()))));
    out
}
