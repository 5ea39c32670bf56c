use std::fmt::Display;

use anyhow::{anyhow, Context};
use chrono::{DateTime, TimeZone, Utc};
use repominer_core::{
    extract, load_rules, mine as run_mine, open_session, plugin_by_name, read_report,
    LanguagePlugin, Location, MetricKinds, MiningOutput, MiningReport, MiningStage,
    RepositorySession, RepositorySource,
};
use tempfile::TempDir;

use crate::{ExtractArgs, MineArgs, RepoArgs, Target};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_REPOSITORY: u8 = 2;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    fn repository(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_REPOSITORY,
            error: error.into(),
        }
    }
}

impl From<repominer_core::Error> for Failure {
    fn from(e: repominer_core::Error) -> Self {
        if e.is_repository_error() {
            Failure::repository(e)
        } else {
            Failure::usage(e)
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// An open repository plus the temporary clone backing it, if any.
struct Opened {
    session: RepositorySession,
    _scratch: Option<TempDir>,
}

fn open(args: &RepoArgs) -> CliResult<Opened> {
    let location = Location::parse(&args.repo);
    let mut scratch = None;
    let mut source = RepositorySource::new(location.clone());
    if let Location::Remote(_) = location {
        let path = match &args.clone_dir {
            Some(dir) => dir.clone(),
            None => {
                let dir = tempfile::Builder::new()
                    .prefix("repominer-clone")
                    .tempdir()
                    .context("creating a temporary clone directory")
                    .map_err(Failure::repository)?;
                let path = dir.path().join("repo");
                scratch = Some(dir);
                path
            }
        };
        source = source.with_clone_path(path);
    }
    if let Some(branch) = &args.branch {
        source = source.with_branch(branch);
    }
    let session = open_session(&source)
        .with_context(|| format!("opening {}", args.repo))
        .map_err(Failure::repository)?;
    Ok(Opened {
        session,
        _scratch: scratch,
    })
}

fn plugin(args: &RepoArgs) -> CliResult<Box<dyn LanguagePlugin>> {
    plugin_by_name(
        &args.language,
        &args.extensions,
        args.comment_marker.as_deref(),
    )
    .map_err(Failure::usage)
}

/// `SOURCE_DATE_EPOCH` pins the report timestamp for reproducible output.
fn run_timestamp() -> CliResult<DateTime<Utc>> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(raw) => {
            let secs: i64 = raw.trim().parse().map_err(|_| {
                Failure::usage(anyhow!("SOURCE_DATE_EPOCH is not an integer: {raw:?}"))
            })?;
            Utc.timestamp_opt(secs, 0)
                .single()
                .ok_or_else(|| Failure::usage(anyhow!("SOURCE_DATE_EPOCH out of range: {secs}")))
        }
        Err(_) => Ok(Utc::now()),
    }
}

fn summary(out: &MiningOutput) -> String {
    let mut parts = vec![format!("fixing commits: {}", out.fixing_commits.len())];
    if let Some(fixed) = &out.fixed_files {
        parts.push(format!("fixed files: {}", fixed.len()));
    }
    if let Some(fpf) = &out.failure_prone_files {
        parts.push(format!("failure-prone files: {}", fpf.len()));
    }
    parts.join(", ")
}

fn write_file(path: &std::path::Path, what: impl Display, content: &str) -> CliResult<()> {
    std::fs::write(path, content)
        .with_context(|| format!("writing {what} to {}", path.display()))
        .map_err(Failure::usage)
}

pub fn mine(args: MineArgs) -> CliResult<()> {
    let plugin = plugin(&args.repo)?;
    let rules = load_rules(args.rules.as_deref()).map_err(Failure::usage)?;
    let timestamp = run_timestamp()?;
    let opened = open(&args.repo)?;
    let stage = match args.target {
        Target::FixingCommits => MiningStage::FixingCommits,
        Target::FixedFiles => MiningStage::FixedFiles,
        Target::FailureProneFiles => MiningStage::FailureProneFiles,
    };
    let output = run_mine(&opened.session, plugin.as_ref(), &rules, stage)?;
    let line = summary(&output);
    let report = MiningReport::new(
        args.repo.repo.clone(),
        opened.session.branch().map(str::to_string),
        plugin.name(),
        timestamp,
        output,
    );
    let json = report.to_json()?;
    match &args.out {
        Some(path) => {
            write_file(path, "report", &json)?;
            println!("{line}");
        }
        None => {
            print!("{json}");
            eprintln!("{line}");
        }
    }
    Ok(())
}

pub fn extract_metrics(args: ExtractArgs) -> CliResult<()> {
    let kinds: MetricKinds = args.metrics.parse().map_err(Failure::usage)?;
    let plugin = plugin(&args.repo)?;
    let failure_prone = match &args.fpf {
        Some(path) => {
            let report = read_report(path)
                .with_context(|| format!("reading mining report {}", path.display()))
                .map_err(Failure::repository)?;
            report.failure_prone_files.ok_or_else(|| {
                Failure::usage(anyhow!(
                    "{} has no failure_prone_files; run `mine failure-prone-files` first",
                    path.display()
                ))
            })?
        }
        None => Vec::new(),
    };
    let opened = open(&args.repo)?;
    let dataset = extract(&opened.session, &failure_prone, &kinds, plugin.as_ref())?;
    let mut csv = Vec::new();
    dataset.write_csv(&mut csv)?;
    write_file(
        &args.out,
        "dataset",
        &String::from_utf8(csv).expect("csv output is UTF-8"),
    )?;
    if let Some(path) = &args.json {
        write_file(path, "dataset", &dataset.to_json()?)?;
    }
    println!(
        "rows: {}, failure-prone: {}",
        dataset.rows.len(),
        dataset.positives()
    );
    Ok(())
}
