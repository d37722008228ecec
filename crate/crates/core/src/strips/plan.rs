use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::pddl::{DomainDef, ProblemDef};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
}

impl GroundAction {
    pub fn new(name: &str, args: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<GroundAction>,
}

impl Plan {
    /// One `(action args)` per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&format!("{s}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("unknown action '{0}'")]
    UnknownAction(String),
    #[error("{action} takes {expected} arguments, given {found}")]
    Arity { action: String, expected: usize, found: usize },
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("no action on this line")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {error}")]
pub struct PlanParseError {
    pub line: usize,
    pub error: StepError,
}

const FILLER: &[&str] = &[
    "the", "object", "block", "another", "from", "on", "top", "of", "onto", "to", "and", "then",
];

/// Words of a plan line with numbering, bullets, parentheses and commas removed.
fn step_words(line: &str) -> Vec<String> {
    let lowered = line.to_lowercase();
    let mut text = lowered.trim().trim_start_matches(['-', '*', '>']).trim_start();
    if let Some(rest) = text.strip_prefix("step") {
        text = rest.trim_start();
    }
    let digits = text.len() - text.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        let rest = &text[digits..];
        if let Some(r) = rest.strip_prefix(['.', ')', ':']) {
            text = r;
        }
    }
    let mut words: Vec<String> = text
        .split(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '`'))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect();
    // "pick up a" / "put down a" name the Blocksworld actions.
    if words.len() >= 2 && matches!((words[0].as_str(), words[1].as_str()), ("pick", "up") | ("put", "down")) {
        let joined = format!("{}{}", words[0], words[1]);
        words.splice(0..2, [joined]);
    }
    if let Some(first) = words.first_mut() {
        *first = first.replace('-', "");
    }
    words
}

fn resolve(words: &[String], domain: &DomainDef, problem: &ProblemDef) -> Result<GroundAction, StepError> {
    let (name, rest) = words.split_first().ok_or(StepError::Empty)?;
    let schema = domain
        .actions
        .iter()
        .find(|a| a.name == *name || a.name.replace('-', "") == *name)
        .ok_or_else(|| StepError::UnknownAction(name.clone()))?;
    let args: Vec<String> = rest.iter().filter(|w| !FILLER.contains(&w.as_str())).cloned().collect();
    if args.len() != schema.parameters.len() {
        return Err(StepError::Arity {
            action: schema.name.clone(),
            expected: schema.parameters.len(),
            found: args.len(),
        });
    }
    if let Some(bad) = args.iter().find(|a| !problem.objects.contains(a)) {
        return Err(StepError::UnknownObject(bad.clone()));
    }
    Ok(GroundAction {
        name: schema.name.clone(),
        args,
    })
}

/// Parse a single plan step such as `(stack a b)`, `stack a b` or
/// `2. unstack object c from object a`.
pub fn parse_step(line: &str, domain: &DomainDef, problem: &ProblemDef) -> Result<GroundAction, StepError> {
    resolve(&step_words(line), domain, problem)
}

/// Parse a plan file: every non-blank, non-comment line is one step.
pub fn parse_plan(text: &str, domain: &DomainDef, problem: &ProblemDef) -> Result<Plan, PlanParseError> {
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split(';').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        steps.push(parse_step(body, domain, problem).map_err(|error| PlanParseError { line: i + 1, error })?);
    }
    Ok(Plan { steps })
}

/// A step in model output that names a known action but is otherwise unusable.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("no plan found in the response")]
    NoPlan,
    #[error("step {step_index}: {error}")]
    BadStep { step_index: usize, error: StepError },
}

fn is_terminator(line: &str) -> bool {
    let t = line.trim().to_lowercase();
    t.is_empty() || t == "[plan end]" || t.starts_with("```")
}

/// Pull a plan out of free-form model output: the longest trailing block of
/// consecutive lines whose first word names a declared action. Blank lines,
/// `[PLAN END]` markers and code fences after the block are skipped; any
/// other line ends it.
pub fn extract_plan(text: &str, domain: &DomainDef, problem: &ProblemDef) -> Result<Plan, ExtractError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut end = lines.len();
    while end > 0 && is_terminator(lines[end - 1]) {
        end -= 1;
    }
    let names_action = |l: &str| {
        let words = step_words(l);
        matches!(resolve(&words, domain, problem), Ok(_) | Err(StepError::Arity { .. } | StepError::UnknownObject(_)))
    };
    let mut start = end;
    while start > 0 && names_action(lines[start - 1]) {
        start -= 1;
    }
    if start == end {
        return Err(ExtractError::NoPlan);
    }
    let mut steps = Vec::with_capacity(end - start);
    for (k, line) in lines[start..end].iter().enumerate() {
        let step = parse_step(line, domain, problem).map_err(|error| ExtractError::BadStep {
            step_index: k + 1,
            error,
        })?;
        steps.push(step);
    }
    Ok(Plan { steps })
}
