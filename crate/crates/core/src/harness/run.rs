use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::model::{ChatModel, GENERATION_TEMPERATURE, VERIFICATION_TEMPERATURE};
use super::task::{Assessment, ProblemInstance, SoundVerifier};
use super::templates::{DomainTemplates, TemplateSet, VerifyVariant};
use super::types::{
    Candidate, Critique, Exchange, FeedbackLevel, Round, StopReason, Strategy, StrategyError, Transcript, Verdict,
    VerdictSource, SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("self-critique needs a verifier model")]
    MissingVerifierModel,
}

/// Find the last `Verdict: <word>` marker. Returns `None` when absent or
/// when the word is not a recognised judgement.
pub fn extract_verdict(text: &str) -> Option<bool> {
    let lower = text.to_lowercase();
    let mut search = lower.as_str();
    while let Some(i) = search.rfind("verdict") {
        let after = search[i + "verdict".len()..].trim_start_matches(|c: char| c == ':' || c == '*' || c.is_whitespace());
        let word: String = after.chars().take_while(|c| c.is_alphabetic()).collect();
        match word.as_str() {
            "correct" | "valid" | "yes" => return Some(true),
            "incorrect" | "invalid" | "no" | "wrong" => return Some(false),
            _ => search = &search[..i],
        }
    }
    None
}

/// Drives one instance through a strategy. Templates and verifiers are
/// shared; models are per-instance sessions supplied by the caller.
#[derive(Debug, Clone, Copy)]
pub struct Harness<'a> {
    pub templates: &'a TemplateSet,
    pub sound: SoundVerifier,
    pub variant: VerifyVariant,
}

struct Loop<'h, 'i> {
    harness: &'h Harness<'h>,
    instance: &'i ProblemInstance,
    templates: &'h DomainTemplates,
    base: String,
    rounds: Vec<Round>,
    assessments: Vec<Assessment>,
}

impl<'h, 'i> Loop<'h, 'i> {
    fn new(harness: &'h Harness<'h>, instance: &'i ProblemInstance) -> Self {
        let templates = harness.templates.for_domain(instance.domain());
        Self {
            base: templates.generate(&instance.describe()),
            harness,
            instance,
            templates,
            rounds: Vec::new(),
            assessments: Vec::new(),
        }
    }

    /// Ask the generator once; on success the round is pushed without a verdict.
    fn generate(&mut self, model: &mut dyn ChatModel, prompt: String, level: FeedbackLevel) -> Result<(), String> {
        let c = model.complete(&prompt, GENERATION_TEMPERATURE).map_err(|e| e.to_string())?;
        let assessment = self.harness.sound.assess(self.instance, &c.text, level);
        self.rounds.push(Round {
            ground_truth_correct: assessment.correct(),
            prompt,
            response: c.text,
            verdict: None,
            prompt_tokens: c.prompt_tokens,
            response_tokens: c.response_tokens,
            verification: None,
        });
        self.assessments.push(assessment);
        Ok(())
    }

    fn candidate(&self, index: usize) -> Candidate {
        Candidate {
            raw_text: self.rounds[index].response.clone(),
            parsed: self.assessments[index].canonical.clone(),
            round_index: index as u32 + 1,
        }
    }

    fn sound_verdict(&self, level: FeedbackLevel) -> Verdict {
        let a = self.assessments.last().expect("a round was generated");
        if a.correct() {
            return Verdict::accept(VerdictSource::SoundVerifier);
        }
        let mut critique = Critique::from_faults(level, a.faults.clone());
        critique.rendered = self.harness.render_critique(self.templates, &critique);
        Verdict::reject(VerdictSource::SoundVerifier, critique)
    }

    fn llm_verdict(&self, model: &mut dyn ChatModel) -> Result<(Verdict, Exchange), String> {
        let i = self.rounds.len() - 1;
        let candidate = self.assessments[i]
            .rendered
            .clone()
            .unwrap_or_else(|| self.rounds[i].response.trim().to_string());
        let prompt = self
            .templates
            .verify(self.harness.variant, &self.instance.describe(), candidate.trim_end());
        let c = model
            .complete(&prompt, VERIFICATION_TEMPERATURE)
            .map_err(|e| alloc::format!("verifier: {e}"))?;
        let verdict = match extract_verdict(&c.text) {
            Some(true) => Verdict::accept(VerdictSource::LlmVerifier),
            Some(false) => {
                let items = alloc::vec![c.text.trim().to_string()];
                let mut critique = Critique::from_faults(FeedbackLevel::AllErrors, items);
                critique.rendered = self.harness.render_critique(self.templates, &critique);
                Verdict::reject(VerdictSource::LlmVerifier, critique)
            }
            None => {
                let mut critique = Critique::from_faults(FeedbackLevel::Binary, Vec::new());
                critique.rendered = self.templates.binary();
                Verdict::reject(VerdictSource::LlmVerifier, critique)
            }
        };
        let exchange = Exchange {
            prompt,
            response: c.text,
            prompt_tokens: c.prompt_tokens,
            response_tokens: c.response_tokens,
        };
        Ok((verdict, exchange))
    }

    fn finish(self, strategy: Strategy, final_answer: Option<Candidate>, stop: StopReason, error: Option<String>) -> Transcript {
        let mut t = Transcript {
            schema_version: SCHEMA_VERSION,
            instance_id: self.instance.id.clone(),
            domain: self.instance.domain(),
            strategy,
            rounds: self.rounds,
            final_answer,
            stop_reason: stop,
            error,
            ground_truth_correct: false,
        };
        self.harness.backfill_ground_truth(self.instance, &mut t);
        t
    }
}

impl<'a> Harness<'a> {
    pub fn new(templates: &'a TemplateSet) -> Self {
        Self {
            templates,
            sound: SoundVerifier::default(),
            variant: VerifyVariant::Direct,
        }
    }

    /// Text inserted into a backprompt for `critique`.
    pub fn render_critique(&self, templates: &DomainTemplates, critique: &Critique) -> String {
        if critique.items.is_empty() {
            templates.binary()
        } else {
            templates.errors(&critique.items)
        }
    }

    /// The next prompt after `history`: the base prompt, then each earlier
    /// answer followed by its feedback, ending with `critique` as the
    /// feedback on the most recent answer.
    pub fn build_backprompt(
        &self,
        templates: &DomainTemplates,
        base: &str,
        history: &[Round],
        critique: &Critique,
    ) -> String {
        let mut prompt = String::from(base);
        for (i, round) in history.iter().enumerate() {
            prompt.push_str(&templates.answer(round.response.trim_end()));
            if i + 1 < history.len() {
                let earlier = round
                    .verdict
                    .as_ref()
                    .and_then(|v| v.critique.as_ref())
                    .map_or_else(|| templates.binary(), |c| c.rendered.clone());
                prompt.push_str(&templates.feedback(&earlier));
            }
        }
        prompt.push_str(&templates.feedback(&critique.rendered));
        prompt
    }

    /// Recompute per-round and final ground truth with the sound checker.
    pub fn backfill_ground_truth(&self, instance: &ProblemInstance, transcript: &mut Transcript) {
        for r in &mut transcript.rounds {
            r.ground_truth_correct = self.sound.is_correct(instance, &r.response);
        }
        transcript.ground_truth_correct = transcript
            .final_answer
            .as_ref()
            .is_some_and(|c| self.sound.is_correct(instance, &c.raw_text));
    }

    pub fn run_instance(
        &self,
        strategy: Strategy,
        instance: &ProblemInstance,
        generator: &mut dyn ChatModel,
        verifier: Option<&mut dyn ChatModel>,
    ) -> Result<Transcript, HarnessError> {
        strategy.validate(instance.domain())?;
        Ok(match strategy {
            Strategy::Standard => {
                let mut l = Loop::new(self, instance);
                let base = l.base.clone();
                match l.generate(generator, base, FeedbackLevel::FirstError) {
                    Ok(()) => {
                        let c = l.candidate(0);
                        l.finish(strategy, Some(c), StopReason::Timeout, None)
                    }
                    Err(e) => l.finish(strategy, None, StopReason::GeneratorError, Some(e)),
                }
            }
            Strategy::SoundCritique { level, max_rounds } => self.critique_loop(strategy, instance, generator, None, level, max_rounds),
            Strategy::SelfCritique { max_rounds } => {
                let v = verifier.ok_or(HarnessError::MissingVerifierModel)?;
                self.critique_loop(strategy, instance, generator, Some(v), FeedbackLevel::AllErrors, max_rounds)
            }
            Strategy::Sampling { k } => self.run_sampling(k, instance, generator),
            Strategy::SelfConsistency { k } => self.run_self_consistency(k, instance, generator),
        })
    }

    fn critique_loop(
        &self,
        strategy: Strategy,
        instance: &ProblemInstance,
        generator: &mut dyn ChatModel,
        mut verifier: Option<&mut dyn ChatModel>,
        level: FeedbackLevel,
        max_rounds: u32,
    ) -> Transcript {
        let mut l = Loop::new(self, instance);
        let mut prompt = l.base.clone();
        for _ in 0..max_rounds {
            if let Err(e) = l.generate(generator, prompt, level) {
                let last = l.rounds.len().checked_sub(1).map(|i| l.candidate(i));
                return l.finish(strategy, last, StopReason::GeneratorError, Some(e));
            }
            let i = l.rounds.len() - 1;
            let verdict = match verifier.as_deref_mut() {
                None => l.sound_verdict(level),
                Some(model) => match l.llm_verdict(model) {
                    Ok((v, exchange)) => {
                        l.rounds[i].verification = Some(exchange);
                        v
                    }
                    Err(e) => {
                        let c = l.candidate(i);
                        return l.finish(strategy, Some(c), StopReason::GeneratorError, Some(e));
                    }
                },
            };
            let accepted = verdict.accepted;
            let critique = verdict.critique.clone();
            l.rounds[i].verdict = Some(verdict);
            if accepted {
                let c = l.candidate(i);
                return l.finish(strategy, Some(c), StopReason::VerifierAccepted, None);
            }
            let critique = critique.expect("rejections carry a critique");
            prompt = self.build_backprompt(l.templates, &l.base, &l.rounds, &critique);
        }
        let last = l.rounds.len().checked_sub(1).map(|i| l.candidate(i));
        l.finish(strategy, last, StopReason::Timeout, None)
    }

    /// Re-ask the base prompt up to `k` times, stopping at the first answer
    /// the sound verifier accepts. No history or critique is ever added.
    pub fn run_sampling(&self, k: u32, instance: &ProblemInstance, generator: &mut dyn ChatModel) -> Transcript {
        let strategy = Strategy::Sampling { k };
        let mut l = Loop::new(self, instance);
        for _ in 0..k {
            let base = l.base.clone();
            if let Err(e) = l.generate(generator, base, FeedbackLevel::Binary) {
                let last = l.rounds.len().checked_sub(1).map(|i| l.candidate(i));
                return l.finish(strategy, last, StopReason::GeneratorError, Some(e));
            }
            let i = l.rounds.len() - 1;
            let verdict = l.sound_verdict(FeedbackLevel::Binary);
            let accepted = verdict.accepted;
            l.rounds[i].verdict = Some(verdict);
            if accepted {
                let c = l.candidate(i);
                return l.finish(strategy, Some(c), StopReason::VerifierAccepted, None);
            }
        }
        let last = l.rounds.len().checked_sub(1).map(|i| l.candidate(i));
        l.finish(strategy, last, StopReason::Timeout, None)
    }

    /// Draw `k` answers to the base prompt and return the most common one
    /// by canonical form, ties going to the earliest first occurrence.
    pub fn run_self_consistency(&self, k: u32, instance: &ProblemInstance, generator: &mut dyn ChatModel) -> Transcript {
        let strategy = Strategy::SelfConsistency { k };
        let mut l = Loop::new(self, instance);
        let mut error = None;
        for _ in 0..k {
            let base = l.base.clone();
            if let Err(e) = l.generate(generator, base, FeedbackLevel::Binary) {
                error = Some(e);
                break;
            }
        }
        let keys: Vec<Option<String>> = l.assessments.iter().map(|a| a.canonical.clone()).collect();
        let modal = modal_index(&keys);
        let final_answer = match modal {
            Some(i) => Some(l.candidate(i)),
            None if !l.rounds.is_empty() => Some(l.candidate(0)),
            None => None,
        };
        let stop = if error.is_some() {
            StopReason::GeneratorError
        } else {
            StopReason::Timeout
        };
        l.finish(strategy, final_answer, stop, error)
    }
}

/// Index of the first occurrence of the most frequent present key.
pub fn modal_index(keys: &[Option<String>]) -> Option<usize> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        if let Some(k) = k {
            counts.entry(k.as_str()).or_insert((0, i)).0 += 1;
        }
    }
    counts
        .values()
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|&(_, first)| first)
}
