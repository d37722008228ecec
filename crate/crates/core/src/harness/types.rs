use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

/// Bumped whenever a persisted field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// Default round budget of the critique loops.
pub const DEFAULT_MAX_ROUNDS: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    Game24,
    Coloring,
    Strips,
}

impl DomainTag {
    pub fn name(self) -> &'static str {
        match self {
            DomainTag::Game24 => "game24",
            DomainTag::Coloring => "coloring",
            DomainTag::Strips => "strips",
        }
    }

    pub fn supports(self, level: FeedbackLevel) -> bool {
        !(self == DomainTag::Game24 && level == FeedbackLevel::AllErrors)
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackLevel {
    Binary,
    FirstError,
    AllErrors,
}

impl FeedbackLevel {
    pub fn name(self) -> &'static str {
        match self {
            FeedbackLevel::Binary => "binary",
            FeedbackLevel::FirstError => "first_error",
            FeedbackLevel::AllErrors => "all_errors",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{domain} has no {} feedback", level.name())]
pub struct UnsupportedLevel {
    pub level: FeedbackLevel,
    pub domain: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Critique {
    pub level: FeedbackLevel,
    pub items: Vec<String>,
    /// Text inserted into the backprompt.
    pub rendered: String,
}

impl Critique {
    /// Truncate `faults` to what `level` allows. `rendered` gets a plain
    /// default; the harness re-renders it through the template set.
    pub fn from_faults(level: FeedbackLevel, mut faults: Vec<String>) -> Self {
        match level {
            FeedbackLevel::Binary => faults.clear(),
            FeedbackLevel::FirstError => faults.truncate(1),
            FeedbackLevel::AllErrors => {}
        }
        let rendered = if faults.is_empty() {
            String::from("Your previous answer was wrong.")
        } else {
            faults.join("\n")
        };
        Self {
            level,
            items: faults,
            rendered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictSource {
    SoundVerifier,
    LlmVerifier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critique: Option<Critique>,
    pub source: VerdictSource,
}

impl Verdict {
    pub fn accept(source: VerdictSource) -> Self {
        Self {
            accepted: true,
            critique: None,
            source,
        }
    }

    pub fn reject(source: VerdictSource, critique: Critique) -> Self {
        Self {
            accepted: false,
            critique: Some(critique),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// One query, no verification.
    Standard,
    /// The model verifies and critiques its own answers.
    SelfCritique { max_rounds: u32 },
    /// A sound verifier critiques at the given granularity.
    SoundCritique { level: FeedbackLevel, max_rounds: u32 },
    /// The identical base prompt up to `k` times, filtered by a sound verifier.
    Sampling { k: u32 },
    /// The modal answer among `k` samples.
    SelfConsistency { k: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("round budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Unsupported(#[from] UnsupportedLevel),
}

impl Strategy {
    /// Maximum number of generation rounds.
    pub fn budget(&self) -> u32 {
        match *self {
            Strategy::Standard => 1,
            Strategy::SelfCritique { max_rounds } | Strategy::SoundCritique { max_rounds, .. } => max_rounds,
            Strategy::Sampling { k } | Strategy::SelfConsistency { k } => k,
        }
    }

    pub fn validate(&self, domain: DomainTag) -> Result<(), StrategyError> {
        if self.budget() == 0 {
            return Err(StrategyError::ZeroBudget);
        }
        if let Strategy::SoundCritique { level, .. } = *self {
            if !domain.supports(level) {
                return Err(UnsupportedLevel {
                    level,
                    domain: domain.name(),
                }
                .into());
            }
        }
        Ok(())
    }

    /// Short column label used in reports.
    pub fn label(&self) -> String {
        use alloc::format;
        match self {
            Strategy::Standard => "standard".into(),
            Strategy::SelfCritique { .. } => "llm+llm".into(),
            Strategy::SoundCritique { level, .. } => format!("sound/{}", level.name()),
            Strategy::Sampling { k } => format!("sampling/k={k}"),
            Strategy::SelfConsistency { k } => format!("self-consistency/k={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub raw_text: String,
    /// Canonical form of the parsed solution; absent iff the domain parser
    /// rejected `raw_text`.
    pub parsed: Option<String>,
    pub round_index: u32,
}

/// A prompt/response pair with token counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub prompt: String,
    pub response: String,
    pub prompt_tokens: u64,
    pub response_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub prompt: String,
    pub response: String,
    pub verdict: Option<Verdict>,
    pub prompt_tokens: u64,
    pub response_tokens: u64,
    /// The verification query, when a language model verified this round.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Exchange>,
    /// Sound-checker judgement of this round's answer, filled post hoc.
    #[serde(default)]
    pub ground_truth_correct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    VerifierAccepted,
    Timeout,
    GeneratorError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema_version: u32,
    pub instance_id: String,
    pub domain: DomainTag,
    pub strategy: Strategy,
    pub rounds: Vec<Round>,
    pub final_answer: Option<Candidate>,
    pub stop_reason: StopReason,
    /// Set when `stop_reason` is `GeneratorError`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub ground_truth_correct: bool,
}

impl Transcript {
    pub fn accepted_round(&self) -> Option<usize> {
        self.rounds
            .iter()
            .position(|r| r.verdict.as_ref().is_some_and(|v| v.accepted))
            .map(|i| i + 1)
    }
}

/// Inclusive 1-based selection over an ordered instance set, e.g. `901-1000`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid selection '{0}', expected FIRST-LAST with 1 <= FIRST <= LAST")]
pub struct SelectionError(pub String);

impl Selection {
    pub fn parse(text: &str) -> Result<Self, SelectionError> {
        let err = || SelectionError(text.into());
        let (a, b) = text.split_once('-').ok_or_else(err)?;
        let first: usize = a.trim().parse().map_err(|_| err())?;
        let last: usize = b.trim().parse().map_err(|_| err())?;
        if first == 0 || last < first {
            return Err(err());
        }
        Ok(Self { first, last })
    }

    pub fn contains(&self, rank: usize) -> bool {
        (self.first..=self.last).contains(&rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn critique_levels_truncate_items() {
        let faults = vec!["a".into(), "b".into(), "c".into()];
        assert!(Critique::from_faults(FeedbackLevel::Binary, faults.clone()).items.is_empty());
        assert_eq!(Critique::from_faults(FeedbackLevel::FirstError, faults.clone()).items, ["a"]);
        assert_eq!(Critique::from_faults(FeedbackLevel::AllErrors, faults).items.len(), 3);
    }

    #[test]
    fn strategy_validation() {
        assert!(Strategy::SoundCritique { level: FeedbackLevel::AllErrors, max_rounds: 15 }
            .validate(DomainTag::Game24)
            .is_err());
        assert!(Strategy::SoundCritique { level: FeedbackLevel::AllErrors, max_rounds: 15 }
            .validate(DomainTag::Coloring)
            .is_ok());
        assert_eq!(Strategy::Sampling { k: 0 }.validate(DomainTag::Strips), Err(StrategyError::ZeroBudget));
        assert_eq!(Strategy::Standard.budget(), 1);
    }

    #[test]
    fn selection_parse() {
        assert_eq!(Selection::parse("901-1000").unwrap(), Selection { first: 901, last: 1000 });
        assert!(Selection::parse("0-3").is_err());
        assert!(Selection::parse("5-3").is_err());
        assert!(Selection::parse("abc").is_err());
    }

    #[test]
    fn strategy_serializes_tagged() {
        let s = Strategy::SoundCritique { level: FeedbackLevel::FirstError, max_rounds: 15 };
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"sound_critique","level":"first_error","max_rounds":15}"#);
    }
}
