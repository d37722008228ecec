use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::types::{Critique, DomainTag, FeedbackLevel, Verdict, VerdictSource};
use crate::coloring::{coloring_faults, parse_coloring_answer, ColoringInstance, VerifyOptions};
use crate::game24::{check_expression, G24Instance};
use crate::strips::{extract_plan, plan_faults, StripsInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Game24(G24Instance),
    Coloring(ColoringInstance),
    Strips(StripsInstance),
}

/// A domain-tagged task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub id: String,
    pub payload: Payload,
}

impl ProblemInstance {
    pub fn new(id: impl Into<String>, payload: Payload) -> Self {
        Self { id: id.into(), payload }
    }

    pub fn domain(&self) -> DomainTag {
        match self.payload {
            Payload::Game24(_) => DomainTag::Game24,
            Payload::Coloring(_) => DomainTag::Coloring,
            Payload::Strips(_) => DomainTag::Strips,
        }
    }

    /// The instance as it appears in prompts.
    pub fn describe(&self) -> String {
        match &self.payload {
            Payload::Game24(g) => g.describe(),
            Payload::Coloring(c) => c.describe(),
            Payload::Strips(s) => s.describe(),
        }
    }
}

/// Result of checking one answer text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    /// Canonical form of the parsed answer, if it parsed.
    pub canonical: Option<String>,
    /// Answer re-rendered in the requested output format, if it parsed.
    pub rendered: Option<String>,
    /// Every fault found, most important first. Empty iff correct.
    pub faults: Vec<String>,
}

impl Assessment {
    pub fn correct(&self) -> bool {
        self.faults.is_empty()
    }
}

/// The sound checkers of all domains behind one interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SoundVerifier {
    pub coloring: VerifyOptions,
}

impl SoundVerifier {
    /// Check `text` against `instance`. `level` only matters for planning,
    /// where all-errors feedback continues past inexecutable steps.
    pub fn assess(&self, instance: &ProblemInstance, text: &str, level: FeedbackLevel) -> Assessment {
        match &instance.payload {
            Payload::Game24(g) => {
                let check = check_expression(g, text);
                let canonical = check.expr.as_ref().map(|e| e.canonical());
                Assessment {
                    rendered: canonical.clone(),
                    canonical,
                    faults: check.faults.iter().map(|f| format!("{f}")).collect(),
                }
            }
            Payload::Coloring(c) => match parse_coloring_answer(text) {
                Ok(col) => Assessment {
                    canonical: Some(col.canonical()),
                    rendered: Some(col.render()),
                    faults: coloring_faults(c, &col, self.coloring).iter().map(|f| format!("{f}")).collect(),
                },
                Err(_) => Assessment {
                    canonical: None,
                    rendered: None,
                    faults: alloc::vec![String::from("The answer contains no vertex color assignments.")],
                },
            },
            Payload::Strips(s) => {
                let plan = extract_plan(text, &s.domain, &s.problem).ok();
                Assessment {
                    canonical: plan.as_ref().map(|p| p.render().replace('\n', "")),
                    rendered: plan.as_ref().map(|p| p.render()),
                    faults: plan_faults(&s.domain, &s.problem, text, level)
                        .iter()
                        .map(|f| f.to_string())
                        .collect(),
                }
            }
        }
    }

    pub fn is_correct(&self, instance: &ProblemInstance, text: &str) -> bool {
        self.assess(instance, text, FeedbackLevel::FirstError).correct()
    }

    pub fn verify(&self, instance: &ProblemInstance, text: &str, level: FeedbackLevel) -> Verdict {
        let a = self.assess(instance, text, level);
        if a.correct() {
            Verdict::accept(VerdictSource::SoundVerifier)
        } else {
            Verdict::reject(VerdictSource::SoundVerifier, Critique::from_faults(level, a.faults))
        }
    }
}
