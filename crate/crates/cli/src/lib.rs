//! `resumerag` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | bad config, unreadable input, failed preflight or label join |
//! | 3 | screening finished with some failures |
//! | 4 | no resume screened successfully |
//! | 5 | too few records for the requested metrics |

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use resumerag::config::AppConfig;
use resumerag::domain::JobLevel;
use resumerag::llm::GatewayStats;

mod evaluate;
mod index;
mod inputs;
mod report;
mod screen;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PARTIAL: u8 = 3;
pub const EXIT_NONE_OK: u8 = 4;
pub const EXIT_INSUFFICIENT: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "resumerag",
    version,
    about = "Retrieval-augmented multi-agent resume screening"
)]
pub struct Cli {
    /// TOML config file. Without one, a mock provider and `./store.rrks`
    /// are used.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chunk, embed and store criteria documents.
    Index(IndexArgs),
    /// Screen resumes and write one JSONL record per resume.
    Screen(ScreenArgs),
    /// Compare screening results against HR labels.
    Evaluate(EvaluateArgs),
    /// Render a ranked markdown report from screening results.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// `.txt`/`.md` files, `.json` documents, or directories of them.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Add to the existing store instead of starting a new one.
    #[arg(long)]
    pub append: bool,
    /// Overrides `paths.store`.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Resume text files or directories of them. The file stem is the
    /// resume id.
    #[arg(required = true)]
    pub resumes: Vec<PathBuf>,
    /// JSON object mapping resume id to `{"title": ..., "level": ...}`.
    #[arg(long)]
    pub jobs: Option<PathBuf>,
    /// Job title for resumes missing from the manifest.
    #[arg(long)]
    pub job_title: Option<String>,
    /// Level paired with `--job-title`: junior, mid, senior or leadership.
    #[arg(long, default_value = "mid")]
    pub job_level: JobLevel,
    /// Give the evaluator the raw resume instead of extracted sections.
    #[arg(long)]
    pub no_extraction: bool,
    /// Defaults to `<output_dir>/results.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write each resume's agent calls to `<dir>/<id>.json`.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
    /// Overrides `paths.store`.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// JSONL of `{"resume_id": ..., "scores": [5 numbers]}`.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10,15,20")]
    pub percentiles: Vec<u32>,
    /// Defaults to `<output_dir>/evaluation`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Row label in the text table. Defaults to the chat model.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// Defaults to `<output_dir>/report.md`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A finished command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    /// Provider usage, for commands that built a gateway.
    pub stats: Option<GatewayStats>,
}

impl Outcome {
    fn ok() -> Self {
        Self {
            code: EXIT_OK,
            stats: None,
        }
    }
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub(crate) trait ExitCode<T> {
    fn exit_code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitCode<T> for Result<T, E> {
    fn exit_code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

pub(crate) fn fail(code: u8, msg: impl fmt::Display) -> Failure {
    Failure {
        code,
        error: anyhow::anyhow!("{msg}"),
    }
}

const DEFAULT_CONFIG: &str = "[provider]\nkind = \"mock\"\n\n[paths]\nstore = \"store.rrks\"\n";

pub(crate) fn load_config(path: Option<&Path>) -> Result<AppConfig, Failure> {
    match path {
        Some(p) => AppConfig::load(p).exit_code(EXIT_INPUT),
        None => AppConfig::parse(DEFAULT_CONFIG, Path::new(".")).exit_code(EXIT_INPUT),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let config = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Index(args) => index::run(&config, args),
        Command::Screen(args) => screen::run(&config, args),
        Command::Evaluate(args) => evaluate::run(&config, args),
        Command::Report(args) => report::run(&config, args),
    }
}

/// Parses `args` (program name first), runs the command and returns its
/// exit code, printing any error to stderr.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(outcome) => outcome.code,
        Err(f) => {
            eprintln!("resumerag: {f}");
            f.code
        }
    }
}
