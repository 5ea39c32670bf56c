//! `repominer`: mine a git repository for failure-prone files and export a
//! release-level dataset.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "repominer", version, about)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Identify fixing commits, fixed files or failure-prone snapshots and
    /// write a JSON mining report.
    Mine(MineArgs),
    /// Build the per-release dataset of metrics and failure-prone labels.
    ExtractMetrics(ExtractArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    FixingCommits,
    FixedFiles,
    FailureProneFiles,
}

#[derive(Args, Debug)]
struct RepoArgs {
    /// Repository URL or local path.
    repo: String,

    /// Language plugin (yaml-config, generic).
    #[arg(long)]
    language: String,

    /// File extensions for the generic plugin, comma separated.
    #[arg(long = "ext", value_delimiter = ',')]
    extensions: Vec<String>,

    /// Line comment marker for the generic plugin.
    #[arg(long)]
    comment_marker: Option<String>,

    /// Branch to analyze; defaults to HEAD.
    #[arg(long)]
    branch: Option<String>,

    /// Where to clone remote repositories. Reused when it already holds a
    /// clone. Without it a temporary directory is used.
    #[arg(long, env = "REPOMINER_CLONE_DIR")]
    clone_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MineArgs {
    /// How far to run the pipeline.
    #[arg(value_enum)]
    target: Target,

    #[command(flatten)]
    repo: RepoArgs,

    /// TOML rule file replacing the default classification rules.
    #[arg(long)]
    rules: Option<PathBuf>,

    /// Report path. Without it the report goes to stdout and the summary
    /// to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[command(flatten)]
    repo: RepoArgs,

    /// Mining report providing the failure-prone snapshots. Without it
    /// every row is labelled 0.
    #[arg(long)]
    fpf: Option<PathBuf>,

    /// Metric groups: process, product, delta.
    #[arg(long, default_value = "process,product,delta")]
    metrics: String,

    /// Dataset CSV path.
    #[arg(long)]
    out: PathBuf,

    /// Also write the dataset as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too and are not failures.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Mine(args) => commands::mine(args),
        Command::ExtractMetrics(args) => commands::extract_metrics(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
