//! Read-only access to a git repository.
//!
//! A [`RepositorySession`] linearizes the analyzed branch along first parents
//! once, when it is opened, and answers every later question (commit order,
//! file changes, blame, releases, file contents) against that snapshot.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, TimeZone, Utc};
use git2::{
    BlameOptions, BranchType, Delta, DiffFindOptions, DiffOptions, FetchOptions, ObjectType, Oid,
    Patch, ProxyOptions, Repository, Tree,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Files with a NUL byte in this many leading bytes are treated as binary.
const BINARY_SNIFF_LEN: usize = 8000;

/// A full 40-hex-character commit id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CommitId(String);

impl CommitId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn oid(&self) -> Oid {
        // Validated on construction.
        Oid::from_str(&self.0).expect("valid commit id")
    }
}

impl From<Oid> for CommitId {
    fn from(oid: Oid) -> Self {
        CommitId(oid.to_string())
    }
}

impl FromStr for CommitId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() == 40 && s.bytes().all(|b| b.is_ascii_hexdigit()) {
            Ok(CommitId(s.to_ascii_lowercase()))
        } else {
            Err(Error::UnknownCommit(s.to_string()))
        }
    }
}

impl TryFrom<String> for CommitId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CommitId> for String {
    fn from(id: CommitId) -> Self {
        id.0
    }
}

impl fmt::Display for CommitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Remote(String),
    Local(PathBuf),
}

impl Location {
    /// Anything that looks like a URL (`scheme://` or scp-style `user@host:path`)
    /// is remote; everything else is a local path.
    pub fn parse(s: &str) -> Self {
        let scp_like = s
            .split_once(':')
            .map(|(host, _)| host.contains('@') && !host.contains('/'))
            .unwrap_or(false);
        if s.contains("://") || scp_like {
            Location::Remote(s.to_string())
        } else {
            Location::Local(PathBuf::from(s))
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Remote(url) => f.write_str(url),
            Location::Local(path) => write!(f, "{}", path.display()),
        }
    }
}

/// Where to find the repository to mine.
#[derive(Clone, Debug)]
pub struct RepositorySource {
    pub location: Location,
    pub branch: Option<String>,
    /// Directory for the clone; required when `location` is remote.
    pub clone_path: Option<PathBuf>,
}

impl RepositorySource {
    pub fn new(location: Location) -> Self {
        Self {
            location,
            branch: None,
            clone_path: None,
        }
    }

    pub fn local(path: impl Into<PathBuf>) -> Self {
        Self::new(Location::Local(path.into()))
    }

    pub fn remote(url: impl Into<String>) -> Self {
        Self::new(Location::Remote(url.into()))
    }

    pub fn with_branch(mut self, branch: impl Into<String>) -> Self {
        self.branch = Some(branch.into());
        self
    }

    pub fn with_clone_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.clone_path = Some(path.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    Added,
    Deleted,
    Modified,
    Renamed,
}

/// A changed line: 1-based line number and text without the line terminator.
pub type Line = (usize, String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileChange {
    pub change_kind: ChangeKind,
    pub old_path: Option<String>,
    pub new_path: Option<String>,
    /// Numbered in the post-image.
    pub added_lines: Vec<Line>,
    /// Numbered in the pre-image.
    pub deleted_lines: Vec<Line>,
    pub hunk_count: usize,
    pub is_binary: bool,
}

impl FileChange {
    /// The path the file has after this change, or before it for deletions.
    pub fn path(&self) -> &str {
        self.new_path
            .as_deref()
            .or(self.old_path.as_deref())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitInfo {
    pub id: CommitId,
    pub parent_ids: Vec<CommitId>,
    pub author_name: String,
    pub author_email: String,
    pub authored_at: DateTime<Utc>,
    pub committed_at: DateTime<Utc>,
    pub message: String,
    pub is_merge: bool,
    /// Changes against the first parent (or the empty tree for a root commit).
    pub changes: Vec<FileChange>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Release {
    pub tag_name: String,
    pub head_commit_id: CommitId,
    pub tagged_at: DateTime<Utc>,
    pub ordinal: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommitOrder {
    OldestFirst,
    NewestFirst,
}

/// Handle on a local, non-shallow clone with its linearized history.
///
/// Confined to one thread at a time; everything it returns is owned and
/// `Send`.
pub struct RepositorySession {
    repo: Repository,
    root: PathBuf,
    branch: Option<String>,
    history: Vec<CommitInfo>,
    order: HashMap<CommitId, usize>,
}

impl fmt::Debug for RepositorySession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RepositorySession")
            .field("root", &self.root)
            .field("branch", &self.branch)
            .field("commits", &self.history.len())
            .finish()
    }
}

/// Open (cloning first if remote) the repository described by `source`.
pub fn open_session(source: &RepositorySource) -> Result<RepositorySession> {
    let repo = match &source.location {
        Location::Local(path) => {
            Repository::open(path).map_err(|_| Error::RepositoryNotFound(path.clone()))?
        }
        Location::Remote(url) => {
            let clone_path = source
                .clone_path
                .as_ref()
                .ok_or_else(|| Error::ClonePathRequired(url.clone()))?;
            clone_or_reuse(url, clone_path, source.branch.as_deref())?
        }
    };
    if repo.is_shallow() {
        return Err(Error::ShallowRepository);
    }
    let root = repo.workdir().unwrap_or_else(|| repo.path()).to_path_buf();

    let (branch, head) = resolve_branch(&repo, source.branch.as_deref())?;
    let history = match head {
        Some(oid) => linearize(&repo, oid)?,
        None => Vec::new(),
    };
    let order = history
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.clone(), i))
        .collect();
    log::debug!(
        "opened {} on {:?}: {} first-parent commits",
        root.display(),
        branch,
        history.len()
    );
    Ok(RepositorySession {
        repo,
        root,
        branch,
        history,
        order,
    })
}

fn clone_or_reuse(url: &str, path: &Path, branch: Option<&str>) -> Result<Repository> {
    if path.join(".git").exists() || path.join("HEAD").exists() {
        if let Ok(repo) = Repository::open(path) {
            log::info!("reusing existing clone at {}", path.display());
            return Ok(repo);
        }
    }
    log::info!("cloning {url} into {}", path.display());
    let mut proxy = ProxyOptions::new();
    proxy.auto();
    let mut fetch = FetchOptions::new();
    fetch.proxy_options(proxy);
    let mut builder = git2::build::RepoBuilder::new();
    builder.fetch_options(fetch);
    if let Some(b) = branch {
        builder.branch(b);
    }
    builder.clone(url, path).map_err(|source| {
        if source.message().contains("not found") && branch.is_some() {
            Error::UnknownBranch(branch.unwrap_or_default().to_string())
        } else {
            Error::Clone {
                url: url.to_string(),
                source,
            }
        }
    })
}

fn resolve_branch(
    repo: &Repository,
    branch: Option<&str>,
) -> Result<(Option<String>, Option<Oid>)> {
    match branch {
        Some(name) => {
            let found = repo
                .find_branch(name, BranchType::Local)
                .or_else(|_| repo.find_branch(&format!("origin/{name}"), BranchType::Remote))
                .map_err(|_| Error::UnknownBranch(name.to_string()))?;
            let oid = found
                .get()
                .peel_to_commit()
                .map_err(|_| Error::UnknownBranch(name.to_string()))?
                .id();
            Ok((Some(name.to_string()), Some(oid)))
        }
        None => match repo.head() {
            Ok(head) => {
                let name = head.shorthand().map(str::to_string);
                Ok((name, Some(head.peel_to_commit()?.id())))
            }
            // Unborn HEAD: a repository without commits.
            Err(e) if e.code() == git2::ErrorCode::UnbornBranch => Ok((None, None)),
            Err(e) => Err(e.into()),
        },
    }
}

fn linearize(repo: &Repository, head: Oid) -> Result<Vec<CommitInfo>> {
    let mut chain = Vec::new();
    let mut current = Some(repo.find_commit(head)?);
    while let Some(commit) = current {
        current = if commit.parent_count() > 0 {
            Some(commit.parent(0)?)
        } else {
            None
        };
        chain.push(commit);
    }
    chain.reverse();
    chain.iter().map(|c| commit_info(repo, c)).collect()
}

fn to_utc(time: git2::Time) -> DateTime<Utc> {
    Utc.timestamp_opt(time.seconds(), 0)
        .single()
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH)
}

fn commit_info(repo: &Repository, commit: &git2::Commit<'_>) -> Result<CommitInfo> {
    let author = commit.author();
    let parent_ids: Vec<CommitId> = commit.parent_ids().map(CommitId::from).collect();
    Ok(CommitInfo {
        id: commit.id().into(),
        is_merge: parent_ids.len() >= 2,
        parent_ids,
        author_name: String::from_utf8_lossy(author.name_bytes()).into_owned(),
        author_email: String::from_utf8_lossy(author.email_bytes()).into_owned(),
        authored_at: to_utc(author.when()),
        committed_at: to_utc(commit.committer().when()),
        message: String::from_utf8_lossy(commit.message_bytes()).into_owned(),
        changes: file_changes(repo, commit)?,
    })
}

fn file_changes(repo: &Repository, commit: &git2::Commit<'_>) -> Result<Vec<FileChange>> {
    let new_tree = commit.tree()?;
    let old_tree = if commit.parent_count() > 0 {
        Some(commit.parent(0)?.tree()?)
    } else {
        None
    };
    let mut opts = DiffOptions::new();
    let mut diff = repo.diff_tree_to_tree(old_tree.as_ref(), Some(&new_tree), Some(&mut opts))?;
    let mut find = DiffFindOptions::new();
    find.renames(true);
    diff.find_similar(Some(&mut find))?;

    let mut changes = Vec::new();
    for idx in 0..diff.deltas().len() {
        let delta = diff.get_delta(idx).expect("delta index in range");
        let old_path = delta.old_file().path().map(path_string);
        let new_path = delta.new_file().path().map(path_string);
        let (change_kind, old_path, new_path) = match delta.status() {
            Delta::Added | Delta::Copied => (ChangeKind::Added, None, new_path),
            Delta::Deleted => (ChangeKind::Deleted, old_path, None),
            Delta::Modified | Delta::Typechange => (ChangeKind::Modified, old_path, new_path),
            Delta::Renamed => (ChangeKind::Renamed, old_path, new_path),
            _ => continue,
        };
        let mut change = FileChange {
            change_kind,
            old_path,
            new_path,
            added_lines: Vec::new(),
            deleted_lines: Vec::new(),
            hunk_count: 0,
            is_binary: delta.flags().is_binary(),
        };
        if let Some(patch) = Patch::from_diff(&diff, idx)? {
            change.is_binary |= patch.delta().flags().is_binary();
            change.hunk_count = patch.num_hunks();
            for h in 0..patch.num_hunks() {
                for l in 0..patch.num_lines_in_hunk(h)? {
                    let line = patch.line_in_hunk(h, l)?;
                    let text = line_text(line.content());
                    match line.origin() {
                        '+' => {
                            if let Some(n) = line.new_lineno() {
                                change.added_lines.push((n as usize, text));
                            }
                        }
                        '-' => {
                            if let Some(n) = line.old_lineno() {
                                change.deleted_lines.push((n as usize, text));
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        if change.is_binary {
            change.added_lines.clear();
            change.deleted_lines.clear();
        }
        changes.push(change);
    }
    Ok(changes)
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

fn line_text(raw: &[u8]) -> String {
    let raw = raw.strip_suffix(b"\n").unwrap_or(raw);
    let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
    String::from_utf8_lossy(raw).into_owned()
}

/// NUL byte within the first 8000 bytes.
pub fn is_binary(content: &[u8]) -> bool {
    content.iter().take(BINARY_SNIFF_LEN).any(|&b| b == 0)
}

fn count_lines(content: &[u8]) -> usize {
    if content.is_empty() {
        return 0;
    }
    let newlines = content.iter().filter(|&&b| b == b'\n').count();
    if content.ends_with(b"\n") {
        newlines
    } else {
        newlines + 1
    }
}

impl RepositorySession {
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn branch(&self) -> Option<&str> {
        self.branch.as_deref()
    }

    /// First-parent history, oldest first.
    pub fn history(&self) -> &[CommitInfo] {
        &self.history
    }

    pub fn list_commits(&self, order: CommitOrder) -> Vec<CommitInfo> {
        match order {
            CommitOrder::OldestFirst => self.history.clone(),
            CommitOrder::NewestFirst => self.history.iter().rev().cloned().collect(),
        }
    }

    /// Position in the oldest-first linearized history.
    pub fn order_of(&self, id: &CommitId) -> Option<usize> {
        self.order.get(id).copied()
    }

    pub fn commit(&self, id: &CommitId) -> Option<&CommitInfo> {
        self.order_of(id).map(|i| &self.history[i])
    }

    fn require_order(&self, id: &CommitId) -> Result<usize> {
        self.order_of(id)
            .ok_or_else(|| Error::UnknownCommit(id.to_string()))
    }

    fn tree_at(&self, id: &CommitId) -> Result<Tree<'_>> {
        let commit = self
            .repo
            .find_commit(id.oid())
            .map_err(|_| Error::UnknownCommit(id.to_string()))?;
        Ok(commit.tree()?)
    }

    /// Raw blob bytes of `path` at `id`.
    pub fn blob_at(&self, id: &CommitId, path: &str) -> Result<Vec<u8>> {
        let tree = self.tree_at(id)?;
        let absent = || Error::PathAbsent {
            commit: id.to_string(),
            path: path.to_string(),
        };
        let entry = tree.get_path(Path::new(path)).map_err(|_| absent())?;
        if entry.kind() != Some(ObjectType::Blob) {
            return Err(absent());
        }
        let blob = self.repo.find_blob(entry.id())?;
        Ok(blob.content().to_vec())
    }

    /// File text at a revision, with invalid UTF-8 replaced.
    pub fn content_at(&self, id: &CommitId, path: &str) -> Result<String> {
        let bytes = self.blob_at(id, path)?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    pub fn exists_at(&self, id: &CommitId, path: &str) -> Result<bool> {
        let tree = self.tree_at(id)?;
        Ok(matches!(
            tree.get_path(Path::new(path)).map(|e| e.kind()),
            Ok(Some(ObjectType::Blob))
        ))
    }

    /// Every file path at a revision, sorted.
    pub fn files_at(&self, id: &CommitId) -> Result<Vec<String>> {
        let tree = self.tree_at(id)?;
        let mut files = Vec::new();
        tree.walk(git2::TreeWalkMode::PreOrder, |dir, entry| {
            if entry.kind() == Some(ObjectType::Blob) {
                if let Some(name) = entry.name() {
                    files.push(format!("{dir}{name}"));
                }
            }
            git2::TreeWalkResult::Ok
        })?;
        files.sort();
        Ok(files)
    }

    /// Map each requested 1-based line of `path` at `commit_id` to the commit
    /// that last modified it, following renames along first parents.
    pub fn blame(
        &self,
        commit_id: &CommitId,
        path: &str,
        line_numbers: &BTreeSet<usize>,
    ) -> Result<BTreeMap<usize, CommitId>> {
        self.require_order(commit_id)?;
        let content = self.blob_at(commit_id, path)?;
        if is_binary(&content) {
            return Err(Error::BinaryFile(path.to_string()));
        }
        let len = count_lines(&content);
        if let Some(&bad) = line_numbers.iter().find(|&&n| n == 0 || n > len) {
            return Err(Error::LineOutOfRange {
                path: path.to_string(),
                line: bad,
                len,
            });
        }
        if line_numbers.is_empty() {
            return Ok(BTreeMap::new());
        }
        let mut opts = BlameOptions::new();
        opts.newest_commit(commit_id.oid())
            .first_parent(true)
            .min_line(*line_numbers.first().expect("non-empty"))
            .max_line(*line_numbers.last().expect("non-empty"));
        let blame = self.repo.blame_file(Path::new(path), Some(&mut opts))?;
        let mut out = BTreeMap::new();
        for &n in line_numbers {
            let hunk = blame.get_line(n).ok_or_else(|| Error::LineOutOfRange {
                path: path.to_string(),
                line: n,
                len,
            })?;
            out.insert(n, CommitId::from(hunk.final_commit_id()));
        }
        Ok(out)
    }

    /// Tags whose target lies on the linearized history, sorted by head commit
    /// authored time (then history position, then tag name).
    pub fn releases(&self) -> Result<Vec<Release>> {
        let mut found: Vec<(DateTime<Utc>, usize, Release)> = Vec::new();
        let names = self.repo.tag_names(None)?;
        for name in names.iter().flatten() {
            let Ok(reference) = self.repo.find_reference(&format!("refs/tags/{name}")) else {
                continue;
            };
            let Ok(commit) = reference.peel_to_commit() else {
                continue;
            };
            let id = CommitId::from(commit.id());
            let Some(order) = self.order_of(&id) else {
                log::debug!("tag {name} is not on the analyzed first-parent history");
                continue;
            };
            let tagged_at = reference
                .peel_to_tag()
                .ok()
                .and_then(|t| t.tagger().map(|s| to_utc(s.when())))
                .unwrap_or_else(|| to_utc(commit.committer().when()));
            let authored = self.history[order].authored_at;
            found.push((
                authored,
                order,
                Release {
                    tag_name: name.to_string(),
                    head_commit_id: id,
                    tagged_at,
                    ordinal: 0,
                },
            ));
        }
        found.sort_by(|a, b| (a.0, a.1, &a.2.tag_name).cmp(&(b.0, b.1, &b.2.tag_name)));
        Ok(found
            .into_iter()
            .enumerate()
            .map(|(i, (_, _, mut r))| {
                r.ordinal = i;
                r
            })
            .collect())
    }
}
