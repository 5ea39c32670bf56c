//! Fixing commits, fixed files and failure-prone snapshots.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::classifier::{FixingCommitRecord, RuleSet};
use crate::error::{Error, Result};
use crate::git::{ChangeKind, CommitId, RepositorySession};
use crate::plugin::LanguagePlugin;
use crate::szz::{self, SzzQuery};

/// One defect interval `[bic, fic)` on one file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedFile {
    /// Path as of the fixing commit.
    pub filepath: String,
    pub fic: CommitId,
    pub bic: CommitId,
    /// Every name the file had while walking back through renames,
    /// including `filepath`.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub aliases: BTreeSet<String>,
}

/// A file snapshot labelled failure-prone.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FailureProneFile {
    /// Path as of `commit_id`.
    pub filepath: String,
    pub commit_id: CommitId,
    pub fixing_commit_id: CommitId,
}

/// Classify every commit and keep the fixing ones that touch at least one
/// file of the plugin's language. Newest first.
pub fn identify_fixing_commits(
    session: &RepositorySession,
    plugin: &dyn LanguagePlugin,
    rules: &RuleSet,
) -> Vec<FixingCommitRecord> {
    session
        .history()
        .iter()
        .rev()
        .filter_map(|commit| {
            let categories = rules.classify(&commit.message, &commit.changes);
            if categories.is_empty() {
                return None;
            }
            if !commit.changes.iter().any(|c| plugin.is_language_change(c)) {
                log::debug!(
                    "discarding {}: no {} files changed",
                    commit.id,
                    plugin.name()
                );
                return None;
            }
            Some(FixingCommitRecord {
                commit_id: commit.id.clone(),
                categories,
            })
        })
        .collect()
}

/// Walk back from the newest fixing commit, computing the bug-introducing
/// commit of every modified language file and merging the resulting
/// intervals per file.
pub fn identify_fixed_files(
    session: &RepositorySession,
    fixing_commits: &[FixingCommitRecord],
    plugin: &dyn LanguagePlugin,
) -> Result<Vec<FixedFile>> {
    let mut fixing: HashSet<&CommitId> = HashSet::new();
    let mut newest = None;
    for record in fixing_commits {
        let order = session
            .order_of(&record.commit_id)
            .ok_or_else(|| Error::UnknownCommit(record.commit_id.to_string()))?;
        newest = newest.max(Some(order));
        fixing.insert(&record.commit_id);
    }
    let Some(newest) = newest else {
        return Ok(Vec::new());
    };

    let history = session.history();
    let mut fixed: Vec<FixedFile> = Vec::new();
    for fic_order in (0..=newest).rev() {
        let commit = &history[fic_order];
        if fixing.contains(&commit.id) {
            for change in &commit.changes {
                if change.change_kind != ChangeKind::Modified
                    || change.is_binary
                    || !plugin.is_language_change(change)
                {
                    continue;
                }
                let path = change.path().to_string();
                let query = SzzQuery {
                    fixing_commit_id: commit.id.clone(),
                    filepath: path.clone(),
                    deleted_lines: change.deleted_lines.clone(),
                };
                let bic = match szz::bug_introducing_commit(session, &query, plugin) {
                    Ok(bic) => bic,
                    Err(e) => {
                        log::warn!("skipping {path} in {}: {e}", commit.id);
                        continue;
                    }
                };
                merge_interval(session, &mut fixed, path, commit.id.clone(), fic_order, bic);
            }
        }
        for change in &commit.changes {
            if change.change_kind != ChangeKind::Renamed {
                continue;
            }
            let (Some(old), Some(new)) = (&change.old_path, &change.new_path) else {
                continue;
            };
            for f in fixed.iter_mut().filter(|f| f.aliases.contains(new)) {
                f.aliases.insert(old.clone());
            }
        }
    }
    Ok(fixed)
}

/// How a newly found interval combines with the last one recorded for the
/// same file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalMerge {
    /// Record a separate interval.
    Append,
    /// Move the recorded interval's bic back to the new bic.
    ExtendBic,
    /// Drop the new interval.
    Keep,
}

/// The merge rule on history orders. Fixing commits are visited newest
/// first, so `fic` is older than every fic already recorded for the file.
/// `previous_bic` is the bic of the last interval recorded for it.
pub fn merge_rule(previous_bic: Option<usize>, bic: usize, fic: usize) -> IntervalMerge {
    match previous_bic {
        None => IntervalMerge::Append,
        Some(prev) if fic < prev => IntervalMerge::Append,
        Some(prev) if bic < prev && prev < fic => IntervalMerge::ExtendBic,
        Some(_) => IntervalMerge::Keep,
    }
}

fn merge_interval(
    session: &RepositorySession,
    fixed: &mut Vec<FixedFile>,
    path: String,
    fic: CommitId,
    fic_order: usize,
    bic: CommitId,
) {
    let bic_order = session.order_of(&bic).expect("bic is on the history");
    let previous = fixed.iter().rposition(|f| f.aliases.contains(&path));
    let prev_bic = previous.map(|p| {
        session
            .order_of(&fixed[p].bic)
            .expect("bic is on the history")
    });
    match (merge_rule(prev_bic, bic_order, fic_order), previous) {
        (IntervalMerge::ExtendBic, Some(p)) => fixed[p].bic = bic,
        (IntervalMerge::Keep, Some(p)) => log::debug!(
            "{path}: interval [{bic}, {fic}) overlaps [{}, {}), kept existing",
            fixed[p].bic,
            fixed[p].fic
        ),
        _ => fixed.push(FixedFile {
            aliases: BTreeSet::from([path.clone()]),
            filepath: path,
            fic,
            bic,
        }),
    }
}

/// Every snapshot in `[bic, fic)` where the file exists under the name it had
/// at that commit, sorted by path and then history order.
pub fn label_snapshots(
    session: &RepositorySession,
    fixed_files: &[FixedFile],
    plugin: &dyn LanguagePlugin,
) -> Result<Vec<FailureProneFile>> {
    let history = session.history();
    let mut out: Vec<(usize, FailureProneFile)> = Vec::new();
    for ff in fixed_files {
        let fic = session
            .order_of(&ff.fic)
            .ok_or_else(|| Error::UnknownCommit(ff.fic.to_string()))?;
        let bic = session
            .order_of(&ff.bic)
            .ok_or_else(|| Error::UnknownCommit(ff.bic.to_string()))?;
        let mut name = ff.filepath.clone();
        for order in (bic..fic).rev() {
            let commit = &history[order];
            if !plugin.ignore_file(&name, None) && session.exists_at(&commit.id, &name)? {
                out.push((
                    order,
                    FailureProneFile {
                        filepath: name.clone(),
                        commit_id: commit.id.clone(),
                        fixing_commit_id: ff.fic.clone(),
                    },
                ));
            }
            if let Some(old) = commit
                .changes
                .iter()
                .find(|c| {
                    c.change_kind == ChangeKind::Renamed && c.new_path.as_deref() == Some(&name)
                })
                .and_then(|c| c.old_path.clone())
            {
                name = old;
            }
        }
    }
    out.sort_by(|(oa, a), (ob, b)| {
        (&a.filepath, oa, &a.fixing_commit_id).cmp(&(&b.filepath, ob, &b.fixing_commit_id))
    });
    out.dedup();
    Ok(out.into_iter().map(|(_, f)| f).collect())
}
