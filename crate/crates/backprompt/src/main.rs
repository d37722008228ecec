use std::path::{Path, PathBuf};
use std::process::ExitCode;

use backprompt::config::{load_templates, ConfigError, Role, RoleConfig, RunConfig};
use backprompt::critique_eval::{run_eval, EvalContext, EvalSuite};
use backprompt::instances::{generate, load_obfuscation, load_selected, GenOptions};
use backprompt::runner::{metrics_from_files, replay, run_suite, write_report, write_run, RunError, RunMeta};
use backprompt::store::{to_jsonl, MemorySink};
use backprompt_core::harness::{DomainTag, VerifyVariant};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "backprompt", version, about = "Generate, verify and critique runs over Game of 24, graph coloring and Blocksworld")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Game24,
    Coloring,
    Strips,
}

impl From<Domain> for DomainTag {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Game24 => DomainTag::Game24,
            Domain::Coloring => DomainTag::Coloring,
            Domain::Strips => DomainTag::Strips,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Game24,
    Coloring,
    Plans,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Direct,
    Cot,
    Swapped,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded instance set.
    GenInstances {
        domain: Domain,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Largest Game of 24 number.
        #[arg(long, default_value_t = 12)]
        number_max: i64,
        /// Smallest coloring graph size.
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        /// Largest coloring graph size.
        #[arg(long, default_value_t = 14)]
        n_max: usize,
        /// Erdős–Rényi edge probability for coloring graphs.
        #[arg(long, default_value_t = 0.4)]
        edge_probability: f64,
        #[arg(long, default_value_t = 3)]
        min_blocks: usize,
        #[arg(long, default_value_t = 5)]
        max_blocks: usize,
        /// TOML renaming map applied to the Blocksworld vocabulary.
        #[arg(long)]
        obfuscation: Option<PathBuf>,
    },
    /// Execute a run configuration.
    Run { config: PathBuf },
    /// Recompute the report of a transcript file.
    Metrics {
        transcripts: PathBuf,
        /// Manifest supplying the report's provenance header.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-execute a finished run against its recorded responses.
    Replay {
        run_dir: PathBuf,
        /// Defaults to `<run_dir>/replay`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score verification and critiques on synthetic candidates.
    CritiqueEval {
        suite: Suite,
        /// Instance file or directory for the suite's domain.
        #[arg(long)]
        instances: PathBuf,
        /// 1-based inclusive range such as 1-100.
        #[arg(long)]
        selection: Option<String>,
        /// TOML file with one verifier role (`kind = "live"`, `"scripted"` or `"replay"`).
        #[arg(long)]
        verifier: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        concurrency: usize,
        #[arg(long, value_enum, default_value = "direct")]
        variant: Variant,
        #[arg(long, default_value = "v1")]
        template_set: String,
        #[arg(long, default_value_t = 12)]
        number_max: i64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Instances(#[from] backprompt::instances::InstanceLoadError),
    #[error(transparent)]
    Store(#[from] backprompt::store::StoreError),
    #[error("replayed transcripts differ from the recording, first at line {0}")]
    ReplayDiffers(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Run(RunError::Config(_)) => 2,
            _ => 1,
        }
    }
}

fn read_role(path: &Path) -> Result<RoleConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut role: RoleConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if let RoleConfig::Scripted { path: p } | RoleConfig::Replay { path: p } = &mut role {
        if p.is_relative() {
            *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
        }
    }
    Ok(role)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| {
        CliError::Store(backprompt::store::StoreError::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenInstances {
            domain,
            seed,
            count,
            out,
            number_max,
            n_min,
            n_max,
            edge_probability,
            min_blocks,
            max_blocks,
            obfuscation,
        } => {
            let mut opts = GenOptions {
                seed,
                count,
                number_max,
                min_blocks,
                max_blocks,
                obfuscation: obfuscation.as_deref().map(load_obfuscation).transpose()?,
                ..GenOptions::default()
            };
            opts.coloring.n_min = n_min;
            opts.coloring.n_max = n_max;
            opts.coloring.p = edge_probability;
            let files = generate(domain.into(), &out, &opts)?;
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Command::Run { config } => {
            let (cfg, text) = RunConfig::load(&config)?;
            let out = run_suite(&cfg, &text, RunMeta::default())?;
            write_run(&cfg.output_dir, &cfg, &out)?;
            println!(
                "{} transcripts ({} failed) written to {}",
                out.transcripts.len(),
                out.manifest.failed.len(),
                cfg.output_dir.display()
            );
        }
        Command::Metrics {
            transcripts,
            manifest,
            out,
        } => {
            let report = metrics_from_files(&transcripts, manifest.as_deref())?;
            write_report(&out, &report)?;
            println!("report written to {}", out.display());
        }
        Command::Replay { run_dir, out } => {
            let out = out.unwrap_or_else(|| run_dir.join("replay"));
            let outcome = replay(&run_dir, &out)?;
            if let Some(line) = outcome.first_difference {
                return Err(CliError::ReplayDiffers(line));
            }
            println!("replay identical; output in {}", out.display());
        }
        Command::CritiqueEval {
            suite,
            instances,
            selection,
            verifier,
            seed,
            concurrency,
            variant,
            template_set,
            number_max,
            out,
        } => {
            let suite = match suite {
                Suite::Game24 => EvalSuite::Game24,
                Suite::Coloring => EvalSuite::Coloring,
                Suite::Plans => EvalSuite::Plans,
            };
            let templates = load_templates(&template_set)?;
            let role = Role::open(&read_role(&verifier)?, seed)?;
            let list = load_selected(suite.domain(), &instances, selection.as_deref(), number_max)?;
            let sink = MemorySink::new();
            let ctx = EvalContext {
                templates: &templates,
                role: &role,
                sink: &sink,
                seed,
                concurrency: concurrency.max(1),
                variant: match variant {
                    Variant::Direct => VerifyVariant::Direct,
                    Variant::Cot => VerifyVariant::Cot,
                    Variant::Swapped => VerifyVariant::Swapped,
                },
                number_max,
            };
            let result = run_eval(suite, &list, &ctx);
            std::fs::create_dir_all(&out).map_err(|source| {
                CliError::Store(backprompt::store::StoreError::Io { path: out.clone(), source })
            })?;
            let name = suite.name();
            write(&out.join(format!("critique_{name}.md")), &result.markdown)?;
            write(&out.join(format!("critique_{name}.jsonl")), &result.cases_jsonl)?;
            write(&out.join("records.jsonl"), &to_jsonl(&sink.sorted()))?;
            print!("{}", result.markdown);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
