//! Versioned JSON mining report and the staged mining pipeline.

use std::collections::HashSet;
use std::path::Path;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::classifier::{FixingCommitRecord, RuleSet};
use crate::error::{Error, Result};
use crate::git::{CommitId, RepositorySession};
use crate::miner::{self, FailureProneFile, FixedFile};
use crate::plugin::LanguagePlugin;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How far to run the mining pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MiningStage {
    FixingCommits,
    FixedFiles,
    FailureProneFiles,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MiningOutput {
    pub fixing_commits: Vec<FixingCommitRecord>,
    pub fixed_files: Option<Vec<FixedFile>>,
    pub failure_prone_files: Option<Vec<FailureProneFile>>,
}

/// Run the pipeline up to and including `stage`.
pub fn mine(
    session: &RepositorySession,
    plugin: &dyn LanguagePlugin,
    rules: &RuleSet,
    stage: MiningStage,
) -> Result<MiningOutput> {
    let fixing_commits = miner::identify_fixing_commits(session, plugin, rules);
    log::info!("{} fixing commits", fixing_commits.len());
    let mut out = MiningOutput {
        fixing_commits,
        ..Default::default()
    };
    if stage >= MiningStage::FixedFiles {
        let fixed = miner::identify_fixed_files(session, &out.fixing_commits, plugin)?;
        log::info!("{} fixed files", fixed.len());
        if stage >= MiningStage::FailureProneFiles {
            let labelled = miner::label_snapshots(session, &fixed, plugin)?;
            log::info!("{} failure-prone snapshots", labelled.len());
            out.failure_prone_files = Some(labelled);
        }
        out.fixed_files = Some(fixed);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiningReport {
    pub schema_version: u32,
    pub tool_version: String,
    #[serde(with = "rfc3339")]
    pub run_timestamp: DateTime<Utc>,
    pub repository: String,
    pub branch: Option<String>,
    pub plugin: String,
    pub fixing_commits: Vec<FixingCommitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_files: Option<Vec<FixedFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_prone_files: Option<Vec<FailureProneFile>>,
}

impl MiningReport {
    pub fn new(
        repository: impl Into<String>,
        branch: Option<String>,
        plugin: impl Into<String>,
        run_timestamp: DateTime<Utc>,
        output: MiningOutput,
    ) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            // Serialized at second precision; truncate so roundtrips are exact.
            run_timestamp: run_timestamp.trunc_subsecs(0),
            repository: repository.into(),
            branch,
            plugin: plugin.into(),
            fixing_commits: output.fixing_commits,
            fixed_files: output.fixed_files,
            failure_prone_files: output.failure_prone_files,
        }
    }

    /// Check that the sections agree with each other.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for record in &self.fixing_commits {
            if record.categories.is_empty() {
                return Err(Error::Report(format!(
                    "fixing_commits: {} has no categories",
                    record.commit_id
                )));
            }
            if !seen.insert(&record.commit_id) {
                return Err(Error::Report(format!(
                    "fixing_commits: {} listed twice",
                    record.commit_id
                )));
            }
        }
        let mut fics: HashSet<&CommitId> = HashSet::new();
        for ff in self.fixed_files.iter().flatten() {
            if !seen.contains(&ff.fic) {
                return Err(Error::Report(format!(
                    "fixed_files: fic {} of {} is not among fixing_commits",
                    ff.fic, ff.filepath
                )));
            }
            fics.insert(&ff.fic);
        }
        if let Some(fpf) = &self.failure_prone_files {
            if self.fixed_files.is_none() && !fpf.is_empty() {
                return Err(Error::Report(
                    "failure_prone_files: present without fixed_files".into(),
                ));
            }
            for f in fpf {
                if !fics.contains(&f.fixing_commit_id) {
                    return Err(Error::Report(format!(
                        "failure_prone_files: fixing_commit_id {} of {} is not among fixed_files",
                        f.fixing_commit_id, f.filepath
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("schema_version")
            .ok_or_else(|| Error::Report("missing field `schema_version`".into()))?
            .as_u64()
            .ok_or_else(|| Error::Report("schema_version: expected an integer".into()))?;
        if version > u64::from(REPORT_SCHEMA_VERSION) {
            return Err(Error::ReportVersion {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                supported: REPORT_SCHEMA_VERSION,
            });
        }
        let report: MiningReport =
            serde_json::from_value(value).map_err(|e| Error::Report(e.to_string()))?;
        report.validate()?;
        Ok(report)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn write_report(report: &MiningReport, path: &Path) -> Result<()> {
    report.write(path)
}

pub fn read_report(path: &Path) -> Result<MiningReport> {
    MiningReport::read(path)
}

mod rfc3339 {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}
