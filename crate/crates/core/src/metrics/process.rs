use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::git::{ChangeKind, CommitInfo, FileChange, Release, RepositorySession};

/// Authors owning less than this share of a file's window commits are minor.
pub const MINOR_CONTRIBUTOR_SHARE: f64 = 0.05;

/// Development activity on one file during one release window.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProcessMetrics {
    pub commits_count: u64,
    /// Distinct author emails.
    pub contributors_count: u64,
    pub minor_contributors_count: u64,
    /// Largest share of the window's commits owned by one author.
    pub highest_experience: f64,
    pub hunks_median: f64,
    pub lines_added: u64,
    pub lines_removed: u64,
    /// Sum over commits of added minus removed lines.
    pub churn_total: i64,
    pub churn_max: i64,
    pub churn_avg: f64,
}

impl ProcessMetrics {
    /// Column names, alphabetical.
    pub const NAMES: [&'static str; 10] = [
        "churn_avg",
        "churn_max",
        "churn_total",
        "commits_count",
        "contributors_count",
        "highest_experience",
        "hunks_median",
        "lines_added",
        "lines_removed",
        "minor_contributors_count",
    ];

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let values = [
            self.churn_avg,
            self.churn_max as f64,
            self.churn_total as f64,
            self.commits_count as f64,
            self.contributors_count as f64,
            self.highest_experience,
            self.hunks_median,
            self.lines_added as f64,
            self.lines_removed as f64,
            self.minor_contributors_count as f64,
        ];
        Self::NAMES
            .iter()
            .map(|n| n.to_string())
            .zip(values)
            .collect()
    }
}

#[derive(Debug, Default)]
struct Accumulator {
    authors: BTreeMap<String, u64>,
    hunks: Vec<usize>,
    added: u64,
    removed: u64,
    churns: Vec<i64>,
}

impl Accumulator {
    fn touch(&mut self, commit: &CommitInfo, change: &FileChange) {
        *self.authors.entry(commit.author_email.clone()).or_default() += 1;
        self.hunks.push(change.hunk_count);
        let added = change.added_lines.len() as u64;
        let removed = change.deleted_lines.len() as u64;
        self.added += added;
        self.removed += removed;
        self.churns.push(added as i64 - removed as i64);
    }

    fn finish(self) -> ProcessMetrics {
        let commits = self.churns.len() as u64;
        if commits == 0 {
            return ProcessMetrics::default();
        }
        let n = commits as f64;
        let top = self.authors.values().copied().max().unwrap_or(0);
        let minor = self
            .authors
            .values()
            .filter(|&&c| (c as f64) / n < MINOR_CONTRIBUTOR_SHARE)
            .count() as u64;
        let churn_total: i64 = self.churns.iter().sum();
        ProcessMetrics {
            commits_count: commits,
            contributors_count: self.authors.len() as u64,
            minor_contributors_count: minor,
            highest_experience: top as f64 / n,
            hunks_median: median(self.hunks),
            lines_added: self.added,
            lines_removed: self.removed,
            churn_total,
            churn_max: self.churns.iter().copied().max().unwrap_or(0),
            churn_avg: churn_total as f64 / n,
        }
    }
}

fn median(mut values: Vec<usize>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] + values[mid]) as f64 / 2.0
    }
}

/// Metrics for every file touched in `window` (oldest first). Renames carry
/// the accumulated activity over to the new name.
pub(crate) fn window_metrics<'a>(
    window: impl IntoIterator<Item = &'a CommitInfo>,
) -> BTreeMap<String, ProcessMetrics> {
    let mut acc: HashMap<String, Accumulator> = HashMap::new();
    for commit in window {
        for change in &commit.changes {
            let path = match change.change_kind {
                ChangeKind::Renamed => {
                    let (Some(old), Some(new)) = (&change.old_path, &change.new_path) else {
                        continue;
                    };
                    if let Some(moved) = acc.remove(old) {
                        acc.insert(new.clone(), moved);
                    }
                    new.clone()
                }
                _ => change.path().to_string(),
            };
            acc.entry(path).or_default().touch(commit, change);
        }
    }
    acc.into_iter().map(|(k, v)| (k, v.finish())).collect()
}

/// History positions `(start, end]` of a release window; `start` is `None`
/// for the first release.
pub(crate) fn window_bounds(
    session: &RepositorySession,
    release: &Release,
    previous: Option<&Release>,
) -> Result<std::ops::Range<usize>> {
    let end = session
        .order_of(&release.head_commit_id)
        .ok_or_else(|| Error::UnknownCommit(release.head_commit_id.to_string()))?;
    let start = match previous {
        None => 0,
        Some(prev) => {
            session
                .order_of(&prev.head_commit_id)
                .ok_or_else(|| Error::UnknownCommit(prev.head_commit_id.to_string()))?
                + 1
        }
    };
    Ok(start.min(end + 1)..end + 1)
}

/// Process metrics over the release window ending at `release`. Files that
/// exist at the release head but were not touched get all-zero metrics.
pub fn get_process_metrics(
    session: &RepositorySession,
    release: &Release,
) -> Result<BTreeMap<String, ProcessMetrics>> {
    let releases = session.releases()?;
    let previous = release.ordinal.checked_sub(1).and_then(|i| releases.get(i));
    process_metrics_for(session, release, previous)
}

pub(crate) fn process_metrics_for(
    session: &RepositorySession,
    release: &Release,
    previous: Option<&Release>,
) -> Result<BTreeMap<String, ProcessMetrics>> {
    let bounds = window_bounds(session, release, previous)?;
    let mut metrics = window_metrics(&session.history()[bounds]);
    for file in session.files_at(&release.head_commit_id)? {
        metrics.entry(file).or_default();
    }
    Ok(metrics)
}
