use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::ColoringInstance;
use crate::harness::{Critique, FeedbackLevel, Verdict, VerdictSource};

/// A vertex-to-color assignment. Labels are compared case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Coloring {
    pub assignment: BTreeMap<usize, String>,
}

impl Coloring {
    pub fn from_indices(colors: &[usize]) -> Self {
        Self {
            assignment: colors.iter().enumerate().map(|(v, c)| (v, c.to_string())).collect(),
        }
    }

    pub fn color(&self, v: usize) -> Option<&str> {
        self.assignment.get(&v).map(String::as_str)
    }

    pub fn distinct_colors(&self) -> usize {
        self.assignment.values().collect::<BTreeSet<_>>().len()
    }

    /// Colors renamed to 0, 1, 2, ... by first appearance in vertex order;
    /// colorings differing only by a permutation of colors share this form.
    pub fn canonical(&self) -> String {
        let mut names: BTreeMap<&str, usize> = BTreeMap::new();
        let mut parts = Vec::with_capacity(self.assignment.len());
        for (v, c) in &self.assignment {
            let next = names.len();
            let id = *names.entry(c.as_str()).or_insert(next);
            parts.push(format!("{v}:{id}"));
        }
        parts.join(",")
    }

    /// One `vertex: color` line per vertex, the format requested from the model.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (v, c) in &self.assignment {
            out.push_str(&format!("{v}: {c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no vertex color assignments found")]
pub struct NoAssignments;

fn normalize_color(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Lenient extraction of `vertex: color` assignments from model output.
///
/// Accepted per clause (clauses split on newlines, commas and semicolons):
/// an optional `vertex`/`node`/`v` prefix, the vertex number, then one of
/// `:`, `=`, `->`, `→`, `colored`, `color`, `gets`, then a color word.
/// A later assignment to the same vertex replaces an earlier one.
pub fn parse_coloring_answer(text: &str) -> Result<Coloring, NoAssignments> {
    let mut coloring = Coloring::default();
    for clause in text.split(['\n', ',', ';']) {
        if let Some((v, c)) = parse_assignment(clause) {
            coloring.assignment.insert(v, c);
        }
    }
    if coloring.assignment.is_empty() {
        Err(NoAssignments)
    } else {
        Ok(coloring)
    }
}

fn parse_assignment(clause: &str) -> Option<(usize, String)> {
    let lower = clause.trim().trim_start_matches(['-', '*', ' ']).to_lowercase();
    let mut rest = lower.as_str();
    for prefix in ["vertex", "node", "v"] {
        if let Some(r) = rest.strip_prefix(prefix) {
            rest = r.trim_start();
            break;
        }
    }
    let digits = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return None;
    }
    let vertex: usize = rest[..digits].parse().ok()?;
    let mut rest = rest[digits..].trim_start();
    let mut matched = false;
    for sep in ["->", "→", ":", "=", "colored", "color", "gets", "is"] {
        if let Some(r) = rest.strip_prefix(sep) {
            rest = r.trim_start();
            matched = true;
            break;
        }
    }
    if !matched {
        return None;
    }
    let word = rest.split_whitespace().next()?;
    let color = normalize_color(word);
    if color.is_empty() || matches!(color.as_str(), "connected" | "adjacent" | "not" | "linked") {
        return None;
    }
    Some((vertex, color))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColoringFault {
    /// Vertices without a color and assignments to vertices that do not exist.
    Malformed { missing: Vec<usize>, unknown: Vec<usize> },
    EdgeConflict { u: usize, v: usize, color: String },
    TooManyColors { used: usize, allowed: usize },
}

fn join(vs: &[usize]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for ColoringFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColoringFault::Malformed { missing, unknown } => {
                f.write_str("The coloring is malformed:")?;
                if !missing.is_empty() {
                    write!(f, " vertices {} have no color.", join(missing))?;
                }
                if !unknown.is_empty() {
                    write!(f, " vertices {} do not exist in the graph.", join(unknown))?;
                }
                Ok(())
            }
            ColoringFault::EdgeConflict { u, v, color } => write!(
                f,
                "Vertices {u} and {v} were both colored {color} despite sharing an edge."
            ),
            ColoringFault::TooManyColors { used, allowed } => {
                write!(f, "The coloring uses {used} colors, but only {allowed} are allowed.")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Reject proper colorings that use more colors than the chromatic number.
    pub reject_non_optimal: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            reject_non_optimal: true,
        }
    }
}

/// Every fault, ordered: malformed, edge conflicts in sorted edge order, color count.
pub fn coloring_faults(instance: &ColoringInstance, candidate: &Coloring, options: VerifyOptions) -> Vec<ColoringFault> {
    let g = &instance.graph;
    let mut faults = Vec::new();
    let missing: Vec<usize> = (0..g.n()).filter(|v| candidate.color(*v).is_none()).collect();
    let unknown: Vec<usize> = candidate.assignment.keys().copied().filter(|&v| v >= g.n()).collect();
    if !missing.is_empty() || !unknown.is_empty() {
        faults.push(ColoringFault::Malformed { missing, unknown });
    }
    for (u, v) in g.edges() {
        if let (Some(a), Some(b)) = (candidate.color(u), candidate.color(v)) {
            if a == b {
                faults.push(ColoringFault::EdgeConflict {
                    u,
                    v,
                    color: a.to_string(),
                });
            }
        }
    }
    let used = candidate.distinct_colors();
    if options.reject_non_optimal && used > instance.chromatic_number {
        faults.push(ColoringFault::TooManyColors {
            used,
            allowed: instance.chromatic_number,
        });
    }
    faults
}

pub fn verify_coloring(
    instance: &ColoringInstance,
    candidate: &Coloring,
    level: FeedbackLevel,
    options: VerifyOptions,
) -> Verdict {
    let faults = coloring_faults(instance, candidate, options);
    if faults.is_empty() {
        return Verdict::accept(VerdictSource::SoundVerifier);
    }
    let items = faults.iter().map(|f| format!("{f}")).collect();
    Verdict::reject(VerdictSource::SoundVerifier, Critique::from_faults(level, items))
}
