//! Accuracy tables, verifier confusion counts and per-iteration curves.

mod report;

pub use report::{
    parse_accuracy_csv, parse_confusion_csv, parse_curve_csv, AccuracyRow, ConfusionRow, CsvError, CurveRow,
    MetricsReport, Provenance, TokenRow,
};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::harness::{Transcript, VerdictSource};

/// Verifier judgements against ground truth. A positive is a candidate that
/// is actually correct; `tp` counts correct candidates the verifier accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// `num/den` as a fraction, or `None` when `den` is zero.
pub fn ratio(num: u64, den: u64) -> Option<f64> {
    (den != 0).then(|| num as f64 / den as f64)
}

/// A table cell such as `87.0% (3567/4100)`, or `n/a (0/0)`.
pub fn rate_cell(num: u64, den: u64) -> String {
    match ratio(num, den) {
        Some(r) => format!("{:.1}% ({num}/{den})", r * 100.0),
        None => format!("n/a ({num}/{den})"),
    }
}

impl ConfusionCounts {
    pub fn record(&mut self, ground_truth_correct: bool, accepted: bool) {
        match (ground_truth_correct, accepted) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Self::default();
        for (truth, accepted) in pairs {
            c.record(truth, accepted);
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn ground_truth_valid(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn ground_truth_invalid(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn false_positive_rate(&self) -> Option<f64> {
        ratio(self.fp, self.ground_truth_invalid())
    }

    pub fn false_negative_rate(&self) -> Option<f64> {
        ratio(self.fn_, self.ground_truth_valid())
    }

    pub fn accuracy_cell(&self) -> String {
        rate_cell(self.tp + self.tn, self.total())
    }

    pub fn fpr_cell(&self) -> String {
        rate_cell(self.fp, self.ground_truth_invalid())
    }

    pub fn fnr_cell(&self) -> String {
        rate_cell(self.fn_, self.ground_truth_valid())
    }
}

/// Confusion counts over every LLM verification query in `transcripts`.
pub fn compute_confusion<'a>(transcripts: impl IntoIterator<Item = &'a Transcript>) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for t in transcripts {
        for r in &t.rounds {
            if let Some(v) = r.verdict.as_ref().filter(|v| v.source == VerdictSource::LlmVerifier) {
                c.record(r.ground_truth_correct, v.accepted);
            }
        }
    }
    c
}

/// Whether the instance would count as solved had the run stopped after
/// `n` rounds: the accepted answer if the verifier accepted by round `n`,
/// otherwise the answer of round `n` (or the last one produced).
pub fn solved_at(t: &Transcript, n: usize) -> bool {
    let idx = match t.accepted_round() {
        Some(a) if a <= n => a,
        _ => n.min(t.rounds.len()),
    };
    idx > 0 && t.rounds[idx - 1].ground_truth_correct
}

/// Fraction of instances solved as if the timeout were `n`, for `n` in
/// `1..=budget`. An empty transcript set yields zeros.
pub fn compute_iteration_curve(transcripts: &[Transcript], budget: usize) -> Vec<f64> {
    (1..=budget)
        .map(|n| {
            let solved = transcripts.iter().filter(|t| solved_at(t, n)).count() as u64;
            ratio(solved, transcripts.len() as u64).unwrap_or(0.0)
        })
        .collect()
}
