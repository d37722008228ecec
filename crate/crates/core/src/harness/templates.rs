use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::types::DomainTag;
use crate::text::{Template, TemplateError};

/// How the LLM verifier is asked to judge a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyVariant {
    /// Verdict first, then reasons.
    #[default]
    Direct,
    /// Step-by-step reasoning before the verdict.
    Cot,
    /// Reasons first, then the verdict.
    Swapped,
}

impl VerifyVariant {
    pub fn file_stem(self) -> &'static str {
        match self {
            VerifyVariant::Direct => "verify_direct",
            VerifyVariant::Cot => "verify_cot",
            VerifyVariant::Swapped => "verify_swapped",
        }
    }
}

/// File name (without `.txt`) and the placeholders it may use.
const REQUIRED: &[(&str, &[&str])] = &[
    ("generate", &["instance"]),
    ("answer", &["answer"]),
    ("feedback", &["critique"]),
    ("binary", &[]),
    ("errors", &["items"]),
    ("verify_direct", &["instance", "candidate"]),
    ("verify_cot", &["instance", "candidate"]),
    ("verify_swapped", &["instance", "candidate"]),
];

const OPTIONAL: &[(&str, &[&str])] = &[
    ("evaluate_noinfo", &["candidate"]),
    ("verify_format", &["instance", "candidate"]),
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateSetError {
    #[error("{domain}: missing template '{name}.txt'")]
    Missing { domain: &'static str, name: String },
    #[error("{domain}/{name}.txt: {source}")]
    Syntax {
        domain: &'static str,
        name: String,
        source: TemplateError,
    },
    #[error("{domain}/{name}.txt: placeholder {{{placeholder}}} is not available here")]
    Placeholder {
        domain: &'static str,
        name: String,
        placeholder: String,
    },
    #[error("{domain}: no '{name}' template in this set")]
    Absent { domain: &'static str, name: String },
}

/// Prompt templates of one domain, keyed by file stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainTemplates {
    domain: DomainTag,
    templates: BTreeMap<String, Template>,
}

fn render_checked(t: &Template, values: &[(&str, &str)]) -> String {
    let map: BTreeMap<&str, &str> = values.iter().copied().collect();
    t.render(&map).expect("placeholders were checked when the template set was loaded")
}

impl DomainTemplates {
    /// Build from a lookup of file stem to template text. Every required
    /// template must be present and only its documented placeholders used.
    pub fn load(domain: DomainTag, mut source: impl FnMut(&str) -> Option<String>) -> Result<Self, TemplateSetError> {
        let dname = domain.name();
        let mut templates = BTreeMap::new();
        for (required, specs) in [(true, REQUIRED), (false, OPTIONAL)] {
            for (name, allowed) in specs {
                let Some(text) = source(name) else {
                    if required {
                        return Err(TemplateSetError::Missing {
                            domain: dname,
                            name: name.to_string(),
                        });
                    }
                    continue;
                };
                let t = Template::new(text);
                let used = t.placeholders().map_err(|source| TemplateSetError::Syntax {
                    domain: dname,
                    name: name.to_string(),
                    source,
                })?;
                if let Some(bad) = used.into_iter().find(|p| !allowed.contains(&p.as_str())) {
                    return Err(TemplateSetError::Placeholder {
                        domain: dname,
                        name: name.to_string(),
                        placeholder: bad,
                    });
                }
                templates.insert(name.to_string(), t);
            }
        }
        Ok(Self { domain, templates })
    }

    fn get(&self, name: &str) -> &Template {
        &self.templates[name]
    }

    pub fn generate(&self, instance: &str) -> String {
        render_checked(self.get("generate"), &[("instance", instance)])
    }

    pub fn answer(&self, answer: &str) -> String {
        render_checked(self.get("answer"), &[("answer", answer)])
    }

    pub fn feedback(&self, critique: &str) -> String {
        render_checked(self.get("feedback"), &[("critique", critique)])
    }

    pub fn binary(&self) -> String {
        render_checked(self.get("binary"), &[])
    }

    pub fn errors(&self, items: &[String]) -> String {
        render_checked(self.get("errors"), &[("items", &items.join("\n"))])
    }

    pub fn verify(&self, variant: VerifyVariant, instance: &str, candidate: &str) -> String {
        render_checked(
            self.get(variant.file_stem()),
            &[("instance", instance), ("candidate", candidate)],
        )
    }

    /// Render an optional template such as `verify_format` or `evaluate_noinfo`.
    pub fn optional(&self, name: &str, values: &[(&str, &str)]) -> Result<String, TemplateSetError> {
        let t = self.templates.get(name).ok_or_else(|| TemplateSetError::Absent {
            domain: self.domain.name(),
            name: name.to_string(),
        })?;
        Ok(render_checked(t, values))
    }

    /// Concatenated sources, used to fingerprint a template set.
    pub fn fingerprint_source(&self) -> String {
        let mut s = String::new();
        for (k, t) in &self.templates {
            s.push_str(&format!("{}/{k}\n{}\n", self.domain.name(), t.source()));
        }
        s
    }
}

/// Templates for all three domains under one id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub id: String,
    pub game24: DomainTemplates,
    pub coloring: DomainTemplates,
    pub strips: DomainTemplates,
}

macro_rules! builtin_domain {
    ($dir:literal, $optional:expr) => {{
        let mut files: Vec<(&str, &str)> = alloc::vec![
            ("generate", include_str!(concat!("../../templates/v1/", $dir, "/generate.txt"))),
            ("answer", include_str!(concat!("../../templates/v1/", $dir, "/answer.txt"))),
            ("feedback", include_str!(concat!("../../templates/v1/", $dir, "/feedback.txt"))),
            ("binary", include_str!(concat!("../../templates/v1/", $dir, "/binary.txt"))),
            ("errors", include_str!(concat!("../../templates/v1/", $dir, "/errors.txt"))),
            ("verify_direct", include_str!(concat!("../../templates/v1/", $dir, "/verify_direct.txt"))),
            ("verify_cot", include_str!(concat!("../../templates/v1/", $dir, "/verify_cot.txt"))),
            ("verify_swapped", include_str!(concat!("../../templates/v1/", $dir, "/verify_swapped.txt"))),
        ];
        files.extend($optional);
        files
    }};
}

impl TemplateSet {
    pub const BUILTIN_ID: &'static str = "v1";

    /// The template set compiled into the crate.
    pub fn builtin() -> Self {
        let load = |tag, files: Vec<(&str, &str)>| {
            DomainTemplates::load(tag, |name| {
                files.iter().find(|(n, _)| *n == name).map(|(_, t)| t.to_string())
            })
            .expect("built-in templates are valid")
        };
        Self {
            id: Self::BUILTIN_ID.to_string(),
            game24: load(
                DomainTag::Game24,
                builtin_domain!(
                    "game24",
                    [("evaluate_noinfo", include_str!("../../templates/v1/game24/evaluate_noinfo.txt"))]
                ),
            ),
            coloring: load(DomainTag::Coloring, builtin_domain!("coloring", core::iter::empty::<(&str, &str)>())),
            strips: load(
                DomainTag::Strips,
                builtin_domain!("strips", [("verify_format", include_str!("../../templates/v1/strips/verify_format.txt"))]),
            ),
        }
    }

    /// Load a template set from `source(domain, name)`, for example a
    /// directory with one subdirectory per domain.
    pub fn load(
        id: impl Into<String>,
        mut source: impl FnMut(DomainTag, &str) -> Option<String>,
    ) -> Result<Self, TemplateSetError> {
        Ok(Self {
            id: id.into(),
            game24: DomainTemplates::load(DomainTag::Game24, |n| source(DomainTag::Game24, n))?,
            coloring: DomainTemplates::load(DomainTag::Coloring, |n| source(DomainTag::Coloring, n))?,
            strips: DomainTemplates::load(DomainTag::Strips, |n| source(DomainTag::Strips, n))?,
        })
    }

    pub fn for_domain(&self, tag: DomainTag) -> &DomainTemplates {
        match tag {
            DomainTag::Game24 => &self.game24,
            DomainTag::Coloring => &self.coloring,
            DomainTag::Strips => &self.strips,
        }
    }

    pub fn fingerprint_source(&self) -> String {
        let mut s = format!("id={}\n", self.id);
        for d in [&self.game24, &self.coloring, &self.strips] {
            s.push_str(&d.fingerprint_source());
        }
        s
    }
}
