use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{compute_confusion, compute_iteration_curve, rate_cell, ConfusionCounts};
use crate::harness::{DomainTag, Transcript, SCHEMA_VERSION};

/// Key/value lines describing where a report came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccuracyRow {
    pub domain: String,
    pub strategy: String,
    pub correct: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionRow {
    pub domain: String,
    pub strategy: String,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub domain: String,
    pub strategy: String,
    pub values: Vec<f64>,
}

/// Mean prompt tokens of round `round` over the transcripts that reached it.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenRow {
    pub domain: String,
    pub strategy: String,
    pub round: usize,
    pub transcripts: u64,
    pub mean_prompt_tokens: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub provenance: Provenance,
    pub accuracy: Vec<AccuracyRow>,
    pub confusion: Vec<ConfusionRow>,
    pub curves: Vec<CurveRow>,
    pub tokens: Vec<TokenRow>,
}

impl MetricsReport {
    /// Metrics grouped by domain and strategy, in domain then strategy-label order.
    pub fn from_transcripts(transcripts: &[Transcript], provenance: Provenance) -> Self {
        let mut groups: BTreeMap<(DomainTag, String), Vec<&Transcript>> = BTreeMap::new();
        for t in transcripts {
            groups.entry((t.domain, t.strategy.label())).or_default().push(t);
        }
        let mut report = Self {
            provenance,
            ..Self::default()
        };
        for ((domain, strategy), ts) in groups {
            let domain = domain.name().to_string();
            report.accuracy.push(AccuracyRow {
                domain: domain.clone(),
                strategy: strategy.clone(),
                correct: ts.iter().filter(|t| t.ground_truth_correct).count() as u64,
                total: ts.len() as u64,
            });
            let counts = compute_confusion(ts.iter().copied());
            if counts.total() > 0 {
                report.confusion.push(ConfusionRow {
                    domain: domain.clone(),
                    strategy: strategy.clone(),
                    counts,
                });
            }
            let budget = ts.iter().map(|t| t.strategy.budget() as usize).max().unwrap_or(0);
            let owned: Vec<Transcript> = ts.iter().map(|t| (*t).clone()).collect();
            report.curves.push(CurveRow {
                domain: domain.clone(),
                strategy: strategy.clone(),
                values: compute_iteration_curve(&owned, budget),
            });
            let longest = ts.iter().map(|t| t.rounds.len()).max().unwrap_or(0);
            for round in 1..=longest {
                let reached: Vec<u64> = ts
                    .iter()
                    .filter_map(|t| t.rounds.get(round - 1).map(|r| r.prompt_tokens))
                    .collect();
                report.tokens.push(TokenRow {
                    domain: domain.clone(),
                    strategy: strategy.clone(),
                    round,
                    transcripts: reached.len() as u64,
                    mean_prompt_tokens: reached.iter().sum::<u64>() as f64 / reached.len() as f64,
                });
            }
        }
        report
    }

    pub fn accuracy_csv(&self) -> String {
        let mut s = String::from("schema_version,domain,strategy,correct,total,accuracy\n");
        for r in &self.accuracy {
            let acc = super::ratio(r.correct, r.total).map_or("n/a".to_string(), |v| format!("{v:.4}"));
            s.push_str(&format!(
                "{SCHEMA_VERSION},{},{},{},{},{acc}\n",
                r.domain, r.strategy, r.correct, r.total
            ));
        }
        s
    }

    pub fn confusion_csv(&self) -> String {
        let mut s = String::from("schema_version,domain,strategy,tp,fp,tn,fn,accuracy,fpr,fnr\n");
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        for r in &self.confusion {
            let c = &r.counts;
            s.push_str(&format!(
                "{SCHEMA_VERSION},{},{},{},{},{},{},{},{},{}\n",
                r.domain,
                r.strategy,
                c.tp,
                c.fp,
                c.tn,
                c.fn_,
                fmt(c.accuracy()),
                fmt(c.false_positive_rate()),
                fmt(c.false_negative_rate())
            ));
        }
        s
    }

    pub fn curve_csv(&self) -> String {
        let mut s = String::from("schema_version,domain,strategy,round,value\n");
        for r in &self.curves {
            for (i, v) in r.values.iter().enumerate() {
                s.push_str(&format!("{SCHEMA_VERSION},{},{},{},{v:.4}\n", r.domain, r.strategy, i + 1));
            }
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# Metrics report\n\n");
        if !self.provenance.entries.is_empty() {
            s.push_str("| key | value |\n|---|---|\n");
            for (k, v) in &self.provenance.entries {
                s.push_str(&format!("| {k} | {v} |\n"));
            }
            s.push('\n');
        }

        s.push_str("## Accuracy\n\n");
        let mut strategies: Vec<&str> = self.accuracy.iter().map(|r| r.strategy.as_str()).collect();
        strategies.sort_unstable();
        strategies.dedup();
        let mut domains: Vec<&str> = Vec::new();
        for r in &self.accuracy {
            if !domains.contains(&r.domain.as_str()) {
                domains.push(&r.domain);
            }
        }
        s.push_str("| Domain |");
        for st in &strategies {
            s.push_str(&format!(" {st} |"));
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(strategies.len()));
        s.push('\n');
        for d in &domains {
            s.push_str(&format!("| {d} |"));
            for st in &strategies {
                let cell = self
                    .accuracy
                    .iter()
                    .find(|r| r.domain == *d && r.strategy == *st)
                    .map_or("-".to_string(), |r| rate_cell(r.correct, r.total));
                s.push_str(&format!(" {cell} |"));
            }
            s.push('\n');
        }

        s.push_str("\n## Verification\n\n| Domain | Strategy | Accuracy | F.P.R | F.N.R |\n|---|---|---|---|---|\n");
        for r in &self.confusion {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                r.domain,
                r.strategy,
                r.counts.accuracy_cell(),
                r.counts.fpr_cell(),
                r.counts.fnr_cell()
            ));
        }

        s.push_str("\n## Performance by iteration\n\n| Domain | Strategy | Values by round |\n|---|---|---|\n");
        for r in &self.curves {
            let vals: Vec<String> = r.values.iter().map(|v| format!("{v:.2}")).collect();
            s.push_str(&format!("| {} | {} | {} |\n", r.domain, r.strategy, vals.join(" ")));
        }

        s.push_str("\n## Prompt tokens by round\n\n| Domain | Strategy | Round | Transcripts | Mean prompt tokens |\n|---|---|---|---|---|\n");
        for r in &self.tokens {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {:.1} |\n",
                r.domain, r.strategy, r.round, r.transcripts, r.mean_prompt_tokens
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CsvError {
    #[error("missing or unexpected header")]
    Header,
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
}

fn rows<'a>(text: &'a str, header: &str, width: usize) -> Result<Vec<(usize, Vec<&'a str>)>, CsvError> {
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(CsvError::Header);
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != width {
            return Err(CsvError::Row {
                line: i + 2,
                message: format!("expected {width} columns, found {}", cols.len()),
            });
        }
        out.push((i + 2, cols));
    }
    Ok(out)
}

fn num<T: core::str::FromStr>(line: usize, s: &str) -> Result<T, CsvError> {
    s.parse().map_err(|_| CsvError::Row {
        line,
        message: format!("'{s}' is not a number"),
    })
}

pub fn parse_accuracy_csv(text: &str) -> Result<Vec<AccuracyRow>, CsvError> {
    rows(text, "schema_version,domain,strategy,correct,total,accuracy", 6)?
        .into_iter()
        .map(|(line, c)| {
            Ok(AccuracyRow {
                domain: c[1].into(),
                strategy: c[2].into(),
                correct: num(line, c[3])?,
                total: num(line, c[4])?,
            })
        })
        .collect()
}

pub fn parse_confusion_csv(text: &str) -> Result<Vec<ConfusionRow>, CsvError> {
    rows(text, "schema_version,domain,strategy,tp,fp,tn,fn,accuracy,fpr,fnr", 10)?
        .into_iter()
        .map(|(line, c)| {
            Ok(ConfusionRow {
                domain: c[1].into(),
                strategy: c[2].into(),
                counts: ConfusionCounts {
                    tp: num(line, c[3])?,
                    fp: num(line, c[4])?,
                    tn: num(line, c[5])?,
                    fn_: num(line, c[6])?,
                },
            })
        })
        .collect()
}

/// Curve rows; values carry the four decimals written by [`MetricsReport::curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, CsvError> {
    let mut out: Vec<CurveRow> = Vec::new();
    for (line, c) in rows(text, "schema_version,domain,strategy,round,value", 5)? {
        let round: usize = num(line, c[3])?;
        let value: f64 = num(line, c[4])?;
        let same = out.last().is_some_and(|r| r.domain == c[1] && r.strategy == c[2]);
        if !same {
            out.push(CurveRow {
                domain: c[1].into(),
                strategy: c[2].into(),
                values: Vec::new(),
            });
        }
        let row = out.last_mut().expect("just pushed");
        if round != row.values.len() + 1 {
            return Err(CsvError::Row {
                line,
                message: format!("round {round} out of sequence"),
            });
        }
        row.values.push(value);
    }
    Ok(out)
}
