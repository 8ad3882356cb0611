// SPDX-License-Identifier: Apache-2.0

//! `atri`: retrieve, filter and interpret vague legal concepts, and run the
//! concept entailment benchmark.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use atri_core::corpus::{load_concepts, IngestOptions};
use atri_core::llm::{Language, PromptSet};
use atri_core::{ConceptSpec, Corpus, Gateway};
use clap::{Args, Parser, Subcommand};

pub mod backend;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod render;

use backend::Backend;
use config::Config;
use error::{CliError, CliResult};
use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "atri", version, about = "Case-grounded interpretation of vague legal concepts", propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// TOML configuration file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Maximum concurrent model calls
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// Response cache directory
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Call the live provider configured by ATRI_LLM_* (and ATRI_JUDGE_*)
    #[arg(long, global = true, conflicts_with = "fixture")]
    pub live: bool,
    /// Answer model calls from a scripted fixture file
    #[arg(long, global = true)]
    pub fixture: Option<PathBuf>,
    /// Prompt language (zh or en)
    #[arg(long, global = true)]
    pub language: Option<Language>,
    /// Directory of prompt template overrides
    #[arg(long, global = true)]
    pub prompts_dir: Option<PathBuf>,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate and normalize a judgment corpus
    Ingest(commands::ingest::IngestArgs),
    /// Write a seeded synthetic corpus, its ground truth and a matching fixture
    GenerateSynthetic(commands::synthetic::SyntheticArgs),
    /// Retrieve the cases citing a concept's article whose court view mentions it
    Retrieve(commands::retrieve::RetrieveArgs),
    /// Filter relevant cases, label them and extract reasons; or build a test set
    Filter(commands::filter::FilterArgs),
    /// Generate or import a concept interpretation
    Interpret(commands::interpret::InterpretArgs),
    /// Run the concept entailment benchmark
    Bench(commands::bench::BenchArgs),
    /// Render a benchmark report as text and CSV tables
    Report(commands::report::ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::GenerateSynthetic(_) => "generate-synthetic",
            Command::Retrieve(_) => "retrieve",
            Command::Filter(_) => "filter",
            Command::Interpret(_) => "interpret",
            Command::Bench(_) => "bench",
            Command::Report(_) => "report",
        }
    }
}

/// Effective settings for one invocation.
pub struct Context {
    pub argv: Vec<String>,
    pub config: Config,
    pub backend: Backend,
}

impl Context {
    pub fn new(global: &GlobalArgs, argv: Vec<String>) -> CliResult<Context> {
        let mut config = Config::load(global.config.as_deref())?;
        if let Some(p) = global.parallelism {
            if p == 0 {
                return Err(CliError::usage("--parallelism must be at least 1"));
            }
            config.parallelism = p;
        }
        if let Some(dir) = &global.cache_dir {
            config.cache_dir = dir.clone();
        }
        if let Some(lang) = global.language {
            config.language = lang;
        }
        if let Some(dir) = &global.prompts_dir {
            config.prompts_dir = Some(dir.clone());
        }
        let backend = match (&global.fixture, global.live) {
            (Some(path), _) => Backend::Fixture(path.clone()),
            (None, true) => Backend::Live { judge_model: config.models.judge.clone() },
            (None, false) => Backend::Offline,
        };
        Ok(Context { argv, config, backend })
    }

    pub fn prompts(&self) -> CliResult<PromptSet> {
        match &self.config.prompts_dir {
            Some(dir) => Ok(PromptSet::with_overrides(self.config.language, dir)?),
            None => Ok(PromptSet::builtin(self.config.language)),
        }
    }

    pub fn gateway(&self) -> CliResult<Gateway> {
        self.backend.gateway(&self.config.cache_dir)
    }

    pub fn manifest(&self, command: &str) -> RunManifest {
        let mut m = RunManifest::new(command, self.argv.clone(), self.config.digest());
        m.backend = self.backend.describe();
        m
    }

    /// `--concepts`, else the configured concept file.
    pub fn concepts_path(&self, flag: Option<&Path>) -> CliResult<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.config.concepts.clone())
            .ok_or_else(|| CliError::usage("no concept file: pass --concepts or set `concepts` in the config"))
    }

    /// `--corpus`, else the configured corpus file.
    pub fn corpus_path(&self, flag: Option<&Path>) -> CliResult<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.config.corpus.clone())
            .ok_or_else(|| CliError::usage("no corpus: pass --corpus or set `corpus` in the config"))
    }

    pub fn load_concepts(&self, flag: Option<&Path>) -> CliResult<(PathBuf, Vec<ConceptSpec>)> {
        let path = self.concepts_path(flag)?;
        let specs = load_concepts(&path).map_err(|e| CliError::from(e).context(path.display()))?;
        Ok((path, specs))
    }

    pub fn load_corpus(&self, flag: Option<&Path>) -> CliResult<(PathBuf, Corpus)> {
        let path = self.corpus_path(flag)?;
        let corpus = Corpus::ingest(&path, &IngestOptions::default()).map_err(|e| CliError::from(e).context(path.display()))?;
        Ok((path, corpus))
    }
}

pub fn find_concept(specs: &[ConceptSpec], concept_id: &str) -> CliResult<ConceptSpec> {
    specs.iter().find(|s| s.concept_id == concept_id).cloned().ok_or_else(|| {
        let known: Vec<&str> = specs.iter().map(|s| s.concept_id.as_str()).collect();
        CliError::usage(format!("unknown concept {concept_id:?} (known: {})", known.join(", ")))
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Failures print one `error[<category>]: …` line to
/// stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => return parse_failure(e),
    };
    init_logging(cli.global.verbose);
    let argv = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.category.exit_code()
        }
    }
}

fn parse_failure(e: clap::Error) -> i32 {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            0
        }
        ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand | ErrorKind::MissingSubcommand => {
            eprintln!("{}", CliError::usage("a subcommand is required (see --help)"));
            2
        }
        _ => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", CliError::usage(first.strip_prefix("error: ").unwrap_or(first)));
            2
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).try_init();
}

fn dispatch(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    let ctx = Context::new(&cli.global, argv)?;
    match cli.command {
        Command::Ingest(a) => commands::ingest::run(&ctx, &a),
        Command::GenerateSynthetic(a) => commands::synthetic::run(&ctx, &a),
        Command::Retrieve(a) => commands::retrieve::run(&ctx, &a),
        Command::Filter(a) => commands::filter::run(&ctx, &a),
        Command::Interpret(a) => commands::interpret::run(&ctx, &a),
        Command::Bench(a) => commands::bench::run(&ctx, &a),
        Command::Report(a) => commands::report::run(&ctx, &a),
    }
}
