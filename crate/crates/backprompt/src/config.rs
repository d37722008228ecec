//! Run configuration files (TOML) and the model roles they describe.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use backprompt_core::harness::{
    ChatModel, DomainTag, RecordEntry, ReplayModel, ScriptedModel, Strategy, StrategyError, TemplateSet,
    TemplateSetError, VerifyVariant,
};
use backprompt_core::text::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::gateway::{EndpointConfig, GatewayConfigError, LiveEndpoint, LiveModel};
use crate::store::{by_stream, read_jsonl, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0} does not exist")]
    MissingPath(PathBuf),
    #[error("strategy: {0}")]
    Strategy(#[from] StrategyError),
    #[error("strategy {0} needs a [verifier] role")]
    VerifierRequired(String),
    #[error("concurrency must be at least 1")]
    Concurrency,
    #[error("invalid selection: {0}")]
    Selection(String),
    #[error(transparent)]
    Gateway(#[from] GatewayConfigError),
    #[error(transparent)]
    Templates(#[from] TemplateSetError),
    #[error("{path}: template directory is missing {domain}/{name}.txt")]
    TemplateDir { path: PathBuf, domain: String, name: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Where a model role gets its responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoleConfig {
    /// A live chat-completion endpoint.
    Live(EndpointConfig),
    /// A JSON object mapping instance id to the list of responses to give.
    Scripted { path: PathBuf },
    /// A `records.jsonl` file written by an earlier run.
    Replay { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    /// Game of 24: a text file with four numbers per line. Coloring: a
    /// directory of `.col` files. STRIPS: a directory with `domain.pddl`
    /// and one `.pddl` file per problem.
    pub path: PathBuf,
    /// 1-based inclusive range such as `"901-1000"`; everything if absent.
    #[serde(default)]
    pub selection: Option<String>,
    /// Largest allowed Game of 24 number.
    #[serde(default = "default_number_max")]
    pub number_max: i64,
}

fn default_number_max() -> i64 {
    12
}
fn default_template_set() -> String {
    TemplateSet::BUILTIN_ID.to_string()
}
fn default_concurrency() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainTag,
    pub strategy: Strategy,
    pub instances: InstanceSource,
    /// `"v1"` for the built-in set, otherwise a directory holding
    /// `game24/`, `coloring/` and `strips/` template subdirectories.
    #[serde(default = "default_template_set")]
    pub template_set: String,
    #[serde(default)]
    pub verify_variant: VerifyVariant,
    pub generator: RoleConfig,
    #[serde(default)]
    pub verifier: Option<RoleConfig>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
}

fn absolutize(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn absolutize_role(base: &Path, role: &mut RoleConfig) {
    match role {
        RoleConfig::Scripted { path } | RoleConfig::Replay { path } => absolutize(base, path),
        RoleConfig::Live(_) => {}
    }
}

impl RunConfig {
    /// Parse TOML text. Relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let mut c: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        absolutize(base_dir, &mut c.instances.path);
        absolutize(base_dir, &mut c.output_dir);
        if c.template_set != TemplateSet::BUILTIN_ID {
            let mut p = PathBuf::from(&c.template_set);
            absolutize(base_dir, &mut p);
            c.template_set = p.to_string_lossy().into_owned();
        }
        absolutize_role(base_dir, &mut c.generator);
        if let Some(v) = &mut c.verifier {
            absolutize_role(base_dir, v);
        }
        Ok(c)
    }

    /// Read and parse a config file. Returns the config and the file text.
    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok((Self::from_toml(&text, base, path)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// Checks that need no network access: paths, strategy and budgets.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.strategy.validate(self.domain)?;
        if matches!(self.strategy, Strategy::SelfCritique { .. }) && self.verifier.is_none() {
            return Err(ConfigError::VerifierRequired(self.strategy.label()));
        }
        if self.concurrency == 0 {
            return Err(ConfigError::Concurrency);
        }
        if let Some(s) = &self.instances.selection {
            backprompt_core::harness::Selection::parse(s).map_err(|e| ConfigError::Selection(e.0))?;
        }
        let mut paths = vec![self.instances.path.clone()];
        if self.template_set != TemplateSet::BUILTIN_ID {
            paths.push(PathBuf::from(&self.template_set));
        }
        for role in std::iter::once(&self.generator).chain(self.verifier.as_ref()) {
            if let RoleConfig::Scripted { path } | RoleConfig::Replay { path } = role {
                paths.push(path.clone());
            }
        }
        match paths.into_iter().find(|p| !p.exists()) {
            Some(p) => Err(ConfigError::MissingPath(p)),
            None => Ok(()),
        }
    }

    pub fn templates(&self) -> Result<TemplateSet, ConfigError> {
        load_templates(&self.template_set)
    }
}

/// The built-in set for `"v1"`, otherwise a directory of templates.
pub fn load_templates(id: &str) -> Result<TemplateSet, ConfigError> {
    if id == TemplateSet::BUILTIN_ID {
        return Ok(TemplateSet::builtin());
    }
    let dir = PathBuf::from(id);
    let name = dir.file_name().map_or_else(|| id.to_string(), |n| n.to_string_lossy().into_owned());
    let set = TemplateSet::load(name, |domain, name| {
        std::fs::read_to_string(dir.join(domain.name()).join(format!("{name}.txt"))).ok()
    })?;
    Ok(set)
}

/// A model role ready to hand out per-instance sessions.
#[derive(Debug, Clone)]
pub enum Role {
    Live(Arc<LiveEndpoint>),
    Scripted(Arc<BTreeMap<String, Vec<String>>>),
    Replay(Arc<BTreeMap<String, Vec<RecordEntry>>>),
}

impl Role {
    /// Open the role. Live endpoints need their API key in the environment.
    pub fn open(config: &RoleConfig, seed: u64) -> Result<Self, ConfigError> {
        Ok(match config {
            RoleConfig::Live(e) => Role::Live(Arc::new(LiveEndpoint::from_env(e.clone(), seed)?)),
            RoleConfig::Scripted { path } => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                let map = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                Role::Scripted(Arc::new(map))
            }
            RoleConfig::Replay { path } => Role::Replay(Arc::new(by_stream(read_jsonl(path)?))),
        })
    }

    pub fn is_live(&self) -> bool {
        matches!(self, Role::Live(_))
    }

    /// A model for one stream. Scripted roles are keyed by instance id
    /// (`stream` up to the first `/`) or by the full stream name.
    pub fn session(&self, stream: &str) -> Box<dyn ChatModel + Send + '_> {
        match self {
            Role::Live(e) => Box::new(LiveModel(e)),
            Role::Scripted(map) => {
                let id = stream.split('/').next().unwrap_or(stream);
                let responses = map.get(stream).or_else(|| map.get(id)).cloned().unwrap_or_default();
                Box::new(ScriptedModel::new(responses))
            }
            Role::Replay(map) => Box::new(ReplayModel::new(map.get(stream).cloned().unwrap_or_default())),
        }
    }
}

/// SHA-256 of a config file's text, used for provenance.
pub fn config_hash(text: &str) -> String {
    sha256_hex(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use backprompt_core::FeedbackLevel;

    const SAMPLE: &str = r#"
domain = "coloring"
strategy = { kind = "sound_critique", level = "all_errors", max_rounds = 15 }
output_dir = "out"
seed = 3
concurrency = 4

[instances]
path = "graphs"
selection = "1-10"

[generator]
kind = "live"
base_url = "https://example.invalid/v1"
model_name = "some-model"
requests_per_minute = 60

[verifier]
kind = "scripted"
path = "verifier.json"
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let c = RunConfig::from_toml(SAMPLE, Path::new("/cfg"), Path::new("/cfg/run.toml")).unwrap();
        assert_eq!(c.domain, DomainTag::Coloring);
        assert_eq!(c.strategy, Strategy::SoundCritique { level: FeedbackLevel::AllErrors, max_rounds: 15 });
        assert_eq!(c.instances.path, PathBuf::from("/cfg/graphs"));
        assert_eq!(c.output_dir, PathBuf::from("/cfg/out"));
        assert_eq!(c.template_set, "v1");
        match &c.generator {
            RoleConfig::Live(e) => {
                assert_eq!(e.max_retries, 5);
                assert_eq!(e.requests_per_minute, Some(60));
                assert_eq!(e.api_key_env, "OPENAI_API_KEY");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.verifier, Some(RoleConfig::Scripted { path: "/cfg/verifier.json".into() }));
        let again = RunConfig::from_toml(&c.to_toml(), Path::new("/elsewhere"), Path::new("x")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = SAMPLE.replace("seed = 3", "sede = 3");
        assert!(matches!(
            RunConfig::from_toml(&bad, Path::new("/"), Path::new("r.toml")),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn validation_catches_missing_paths_and_roles() {
        let c = RunConfig::from_toml(SAMPLE, Path::new("/nonexistent-dir"), Path::new("r.toml")).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::MissingPath(_))));
        let sc = SAMPLE
            .replace(r#"{ kind = "sound_critique", level = "all_errors", max_rounds = 15 }"#, r#"{ kind = "self_critique", max_rounds = 15 }"#)
            .replace("[verifier]\nkind = \"scripted\"\npath = \"verifier.json\"\n", "");
        let c = RunConfig::from_toml(&sc, Path::new("/"), Path::new("r.toml")).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::VerifierRequired(_))));
    }
}
