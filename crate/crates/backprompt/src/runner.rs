//! Batch execution of a run configuration and the files it produces.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use backprompt_core::harness::{
    ChatModel, DomainTag, Harness, HarnessError, RecordEntry, RecordingModel, SCHEMA_VERSION,
};
use backprompt_core::metrics::{MetricsReport, Provenance};
use backprompt_core::text::sha256_hex;
use backprompt_core::{StopReason, Transcript};
use serde::{Deserialize, Serialize};

use crate::config::{config_hash, ConfigError, Role, RoleConfig, RunConfig};
use crate::instances::{load_selected, InstanceLoadError};
use crate::store::{io_err, read_jsonl, to_jsonl, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Instances(#[from] InstanceLoadError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

/// Run facts written next to the transcripts and into report headers.
/// Contains nothing that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config_sha256: String,
    pub template_set: String,
    pub templates_sha256: String,
    pub seed: u64,
    pub domain: DomainTag,
    pub strategy: String,
    pub instances: usize,
    /// Instances whose run ended in a generator error.
    pub failed: Vec<String>,
    /// `approximate` for offline roles, `endpoint` when a live endpoint reported them.
    pub token_counts: String,
}

impl Manifest {
    pub fn provenance(&self) -> Provenance {
        let mut p = Provenance::default();
        p.push("config_sha256", &self.config_sha256);
        p.push("template_set", &self.template_set);
        p.push("templates_sha256", &self.templates_sha256);
        p.push("seed", self.seed);
        p.push("token_counts", &self.token_counts);
        p
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(io_err(path)).map_err(RunError::Store)?;
        serde_json::from_str(&text).map_err(|e| RunError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub transcripts: Vec<Transcript>,
    pub records: Vec<RecordEntry>,
    pub manifest: Manifest,
    pub report: MetricsReport,
}

/// Apply `f` to every item on up to `workers` threads; results keep item order.
pub fn par_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(i, item);
                slots.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every item was processed"))
        .collect()
}

/// Provenance inputs that a replay carries over from the original run.
#[derive(Debug, Clone, Default)]
pub struct RunMeta {
    pub config_sha256: Option<String>,
    pub token_counts: Option<String>,
}

/// Run every selected instance. Per-instance transport failures end that
/// instance's transcript with a generator error; the suite carries on.
pub fn run_suite(config: &RunConfig, config_text: &str, meta: RunMeta) -> Result<RunOutput, RunError> {
    config.validate()?;
    let templates = config.templates()?;
    let instances = load_selected(
        config.domain,
        &config.instances.path,
        config.instances.selection.as_deref(),
        config.instances.number_max,
    )?;
    let generator = Role::open(&config.generator, config.seed)?;
    let verifier = config.verifier.as_ref().map(|v| Role::open(v, config.seed)).transpose()?;
    let sink = crate::store::MemorySink::new();
    let mut harness = Harness::new(&templates);
    harness.variant = config.verify_variant;

    let results = par_map(&instances, config.concurrency, |_, inst| {
        let mut gen = RecordingModel::new(
            generator.session(&format!("{}/generator", inst.id)),
            sink.clone(),
            format!("{}/generator", inst.id),
        );
        let mut ver = verifier.as_ref().map(|v| {
            RecordingModel::new(
                v.session(&format!("{}/verifier", inst.id)),
                sink.clone(),
                format!("{}/verifier", inst.id),
            )
        });
        harness.run_instance(config.strategy, inst, &mut gen, ver.as_mut().map(|v| v as &mut dyn ChatModel))
    });
    let transcripts = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let live = generator.is_live() || verifier.as_ref().is_some_and(Role::is_live);
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        config_sha256: meta.config_sha256.unwrap_or_else(|| config_hash(config_text)),
        template_set: templates.id.clone(),
        templates_sha256: sha256_hex(&templates.fingerprint_source()),
        seed: config.seed,
        domain: config.domain,
        strategy: config.strategy.label(),
        instances: transcripts.len(),
        failed: transcripts
            .iter()
            .filter(|t| t.stop_reason == StopReason::GeneratorError)
            .map(|t| t.instance_id.clone())
            .collect(),
        token_counts: meta
            .token_counts
            .unwrap_or_else(|| if live { "endpoint" } else { "approximate" }.to_string()),
    };
    let report = MetricsReport::from_transcripts(&transcripts, manifest.provenance());
    Ok(RunOutput {
        transcripts,
        records: sink.sorted(),
        manifest,
        report,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), StoreError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Write `report.md` and the three CSV tables into `dir`.
pub fn write_report(dir: &Path, report: &MetricsReport) -> Result<(), StoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("report.md"), &report.to_markdown())?;
    write_file(&dir.join("accuracy.csv"), &report.accuracy_csv())?;
    write_file(&dir.join("confusion.csv"), &report.confusion_csv())?;
    write_file(&dir.join("curve.csv"), &report.curve_csv())
}

/// Write all run artifacts into `dir`.
pub fn write_run(dir: &Path, config: &RunConfig, out: &RunOutput) -> Result<(), StoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("config.toml"), &config.to_toml())?;
    write_file(&dir.join("transcripts.jsonl"), &to_jsonl(&out.transcripts))?;
    write_file(&dir.join("records.jsonl"), &to_jsonl(&out.records))?;
    write_file(&dir.join("manifest.json"), &out.manifest.to_json())?;
    write_report(dir, &out.report)
}

/// Recompute the report of persisted transcripts. Provenance comes from
/// the manifest when one is given.
pub fn metrics_from_files(transcripts: &Path, manifest: Option<&Path>) -> Result<MetricsReport, RunError> {
    let ts: Vec<Transcript> = read_jsonl(transcripts)?;
    let provenance = match manifest {
        Some(m) => Manifest::load(m)?.provenance(),
        None => Provenance::default(),
    };
    Ok(MetricsReport::from_transcripts(&ts, provenance))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub identical: bool,
    /// 1-based line of the first differing transcript, if any.
    pub first_difference: Option<usize>,
}

/// Re-run a finished run against its own `records.jsonl` and compare the
/// transcripts byte for byte.
pub fn replay(run_dir: &Path, out_dir: &Path) -> Result<ReplayOutcome, RunError> {
    let cfg_path = run_dir.join("config.toml");
    let (mut config, _) = RunConfig::load(&cfg_path)?;
    let manifest = Manifest::load(&run_dir.join("manifest.json"))?;
    let records = run_dir.join("records.jsonl");
    config.generator = RoleConfig::Replay { path: records.clone() };
    if config.verifier.is_some() {
        config.verifier = Some(RoleConfig::Replay { path: records });
    }
    config.output_dir = out_dir.to_path_buf();
    let meta = RunMeta {
        config_sha256: Some(manifest.config_sha256.clone()),
        token_counts: Some(manifest.token_counts.clone()),
    };
    let out = run_suite(&config, "", meta)?;
    write_run(out_dir, &config, &out)?;
    let original_path = run_dir.join("transcripts.jsonl");
    let original = fs::read_to_string(&original_path).map_err(io_err(&original_path))?;
    let again = to_jsonl(&out.transcripts);
    let first_difference = original
        .lines()
        .zip(again.lines())
        .position(|(a, b)| a != b)
        .or_else(|| (original.lines().count() != again.lines().count()).then(|| original.lines().count().min(again.lines().count())))
        .map(|i| i + 1);
    Ok(ReplayOutcome {
        identical: original == again,
        first_difference,
    })
}
