//! Bug-introducing commit identification (SZZ).
//!
//! The lines a fix deletes or rewrites are blamed at the fix's first parent;
//! the oldest commit among the blamed ones is the bug-introducing commit.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::git::{CommitId, Line, RepositorySession};
use crate::plugin::{classify_line, LanguagePlugin, LineClass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SzzQuery {
    pub fixing_commit_id: CommitId,
    pub filepath: String,
    /// Lines removed by the fix, numbered in the parent revision.
    pub deleted_lines: Vec<Line>,
}

/// Deleted lines worth blaming: not blank and not a comment.
pub fn blame_anchors(deleted_lines: &[Line], comment_marker: Option<&str>) -> BTreeSet<usize> {
    deleted_lines
        .iter()
        .filter(|(_, text)| classify_line(text, comment_marker) == LineClass::Code)
        .map(|(n, _)| *n)
        .collect()
}

pub fn bug_introducing_commit(
    session: &RepositorySession,
    query: &SzzQuery,
    plugin: &dyn LanguagePlugin,
) -> Result<CommitId> {
    let fic = &query.fixing_commit_id;
    let commit = session
        .commit(fic)
        .ok_or_else(|| Error::UnknownCommit(fic.to_string()))?;
    let no_anchor = || Error::NoBlameAnchor {
        commit: fic.to_string(),
        path: query.filepath.clone(),
    };
    let parent = commit.parent_ids.first().ok_or_else(no_anchor)?;
    let anchors = blame_anchors(&query.deleted_lines, plugin.comment_marker());
    if anchors.is_empty() {
        return Err(no_anchor());
    }
    let blamed = session.blame(parent, &query.filepath, &anchors)?;
    let fic_order = session
        .order_of(fic)
        .expect("fixing commit is on the history");
    blamed
        .into_values()
        .map(|id| {
            let order = session
                .order_of(&id)
                .filter(|&o| o < fic_order)
                .ok_or_else(|| Error::UnknownCommit(id.to_string()))?;
            Ok((order, id))
        })
        .collect::<Result<BTreeSet<_>>>()?
        .into_iter()
        .next()
        .map(|(_, id)| id)
        .ok_or_else(no_anchor)
}
