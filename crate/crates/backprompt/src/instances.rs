//! Loading and generating instance sets on disk.

use std::fs;
use std::path::{Path, PathBuf};

use backprompt_core::coloring::{from_dimacs, to_dimacs, GeneratorConfig, InstanceGenerator};
use backprompt_core::game24::{enumerate_expressions, parse_instance_file, G24Instance, NumberRange};
use backprompt_core::harness::{DomainTag, Payload, ProblemInstance, Selection};
use backprompt_core::strips::{
    blocksworld_domain, domain_to_pddl, generate_problem, obfuscate, parse_domain, parse_problem, problem_to_pddl,
    ObfuscationMap, ProblemDef, StripsInstance,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::store::{io_err, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum InstanceLoadError {
    #[error(transparent)]
    Io(#[from] StoreError),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("selection {selection} is outside the {available} available instances")]
    Selection { selection: String, available: usize },
}

fn format_err(path: &Path, message: impl ToString) -> InstanceLoadError {
    InstanceLoadError::Format {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Files in `dir` with the given extension, sorted by name.
fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, InstanceLoadError> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    out.sort();
    Ok(out)
}

fn read(path: &Path) -> Result<String, InstanceLoadError> {
    Ok(fs::read_to_string(path).map_err(io_err(path))?)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Load every instance of `domain` stored at `path`, in file order.
pub fn load_all(domain: DomainTag, path: &Path, number_max: i64) -> Result<Vec<ProblemInstance>, InstanceLoadError> {
    match domain {
        DomainTag::Game24 => {
            let range = NumberRange { min: 1, max: number_max };
            let list = parse_instance_file(&read(path)?, range).map_err(|e| format_err(path, e))?;
            Ok(list
                .into_iter()
                .map(|g| {
                    let rank = g.rank.unwrap_or(0);
                    ProblemInstance::new(format!("g24-{rank:04}"), Payload::Game24(g))
                })
                .collect())
        }
        DomainTag::Coloring => files_with_ext(path, "col")?
            .into_iter()
            .map(|f| {
                let inst = from_dimacs(&read(&f)?).map_err(|e| format_err(&f, e))?;
                Ok(ProblemInstance::new(stem(&f), Payload::Coloring(inst)))
            })
            .collect(),
        DomainTag::Strips => {
            let dfile = path.join("domain.pddl");
            let domain = parse_domain(&read(&dfile)?).map_err(|e| format_err(&dfile, e))?;
            files_with_ext(path, "pddl")?
                .into_iter()
                .filter(|f| f.file_name().is_some_and(|n| n != "domain.pddl"))
                .map(|f| {
                    let problem = parse_problem(&read(&f)?, &domain).map_err(|e| format_err(&f, e))?;
                    Ok(ProblemInstance::new(
                        stem(&f),
                        Payload::Strips(StripsInstance {
                            domain: domain.clone(),
                            problem,
                        }),
                    ))
                })
                .collect()
        }
    }
}

/// Load and keep the 1-based positions inside `selection`.
pub fn load_selected(
    domain: DomainTag,
    path: &Path,
    selection: Option<&str>,
    number_max: i64,
) -> Result<Vec<ProblemInstance>, InstanceLoadError> {
    let all = load_all(domain, path, number_max)?;
    let Some(text) = selection else { return Ok(all) };
    let sel = Selection::parse(text).map_err(|e| format_err(path, e.0))?;
    if sel.last > all.len() {
        return Err(InstanceLoadError::Selection {
            selection: text.to_string(),
            available: all.len(),
        });
    }
    Ok(all
        .into_iter()
        .enumerate()
        .filter(|(i, _)| sel.contains(i + 1))
        .map(|(_, p)| p)
        .collect())
}

/// Options for `gen-instances`.
#[derive(Debug, Clone)]
pub struct GenOptions {
    pub seed: u64,
    pub count: usize,
    pub number_max: i64,
    pub coloring: GeneratorConfig,
    pub min_blocks: usize,
    pub max_blocks: usize,
    pub obfuscation: Option<ObfuscationMap>,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 100,
            number_max: 12,
            coloring: GeneratorConfig::default(),
            min_blocks: 3,
            max_blocks: 5,
            obfuscation: None,
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), InstanceLoadError> {
    Ok(fs::write(path, text).map_err(io_err(path))?)
}

/// Solvable Game of 24 puzzles ordered from many distinct solution
/// expressions to few, a stand-in for human solving time. Ties are broken by a seeded shuffle.
pub fn game24_puzzles(number_max: i64, seed: u64) -> Vec<[i64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scored = Vec::new();
    for a in 1..=number_max {
        for b in a..=number_max {
            for c in b..=number_max {
                for d in c..=number_max {
                    let n = [a, b, c, d];
                    let solutions = enumerate_expressions(&n)
                        .iter()
                        .filter(|e| e.evaluate().is(24))
                        .map(|e| e.to_string())
                        .collect::<std::collections::BTreeSet<_>>()
                        .len();
                    if solutions > 0 {
                        scored.push((solutions, n));
                    }
                }
            }
        }
    }
    scored.shuffle(&mut rng);
    scored.sort_by_key(|s| std::cmp::Reverse(s.0));
    scored.into_iter().map(|(_, n)| n).collect()
}

/// Write `count` instances of `domain` under `out`. Returns the written paths.
pub fn generate(domain: DomainTag, out: &Path, opts: &GenOptions) -> Result<Vec<PathBuf>, InstanceLoadError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut written = Vec::new();
    match domain {
        DomainTag::Game24 => {
            let puzzles = game24_puzzles(opts.number_max, opts.seed);
            let mut text = String::new();
            for n in puzzles.iter().take(opts.count) {
                G24Instance::new(n, NumberRange { min: 1, max: opts.number_max }).map_err(|e| format_err(out, e))?;
                text.push_str(&format!("{} {} {} {}\n", n[0], n[1], n[2], n[3]));
            }
            let p = out.join("game24.txt");
            write(&p, &text)?;
            written.push(p);
        }
        DomainTag::Coloring => {
            let rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut gen = InstanceGenerator::new(opts.coloring, rng).map_err(|e| format_err(out, e))?;
            for i in 1..=opts.count {
                let inst = gen.next_instance().map_err(|e| format_err(out, e))?;
                let p = out.join(format!("{i:04}.col"));
                write(&p, &to_dimacs(&inst))?;
                written.push(p);
            }
        }
        DomainTag::Strips => {
            if opts.min_blocks == 0 || opts.min_blocks > opts.max_blocks {
                return Err(format_err(out, "block range must satisfy 1 <= min <= max"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let bw = blocksworld_domain();
            let rename = |problem: ProblemDef| match &opts.obfuscation {
                Some(map) => obfuscate(&bw, &problem, map).map_err(|e| format_err(out, e)),
                None => Ok((bw.clone(), problem)),
            };
            let (domain, _) = rename(ProblemDef {
                name: String::new(),
                domain: bw.name.clone(),
                objects: Vec::new(),
                init: Default::default(),
                goal: Default::default(),
            })?;
            let p = out.join("domain.pddl");
            write(&p, &domain_to_pddl(&domain))?;
            written.push(p);
            for i in 1..=opts.count {
                let n = rng.gen_range(opts.min_blocks..=opts.max_blocks);
                let (_, problem) = rename(generate_problem(n, &format!("p{i:04}"), &mut rng))?;
                let path = out.join(format!("p{i:04}.pddl"));
                write(&path, &problem_to_pddl(&problem))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Read an obfuscation map from TOML with `[predicates]` and `[actions]` tables.
pub fn load_obfuscation(path: &Path) -> Result<ObfuscationMap, InstanceLoadError> {
    toml::from_str(&read(path)?).map_err(|e| format_err(path, e))
}
