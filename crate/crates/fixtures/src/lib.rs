//! Scripted git repositories for tests and benchmarks.
//!
//! Every commit gets a fixed, strictly increasing timestamp so that commit
//! ids are reproducible across runs.

use std::fs;
use std::path::{Path, PathBuf};

use git2::{IndexAddOption, Oid, Repository, RepositoryInitOptions, Signature, Time};
use tempfile::TempDir;

pub use git2::Error;

pub mod scenarios;
pub mod synthetic;

/// First commit timestamp (2021-01-01T00:00:00Z).
pub const BASE_TIME: i64 = 1_609_459_200;
/// Spacing between consecutive commits, in seconds.
pub const STEP: i64 = 3_600;

#[derive(Debug, Clone)]
pub struct Author {
    pub name: String,
    pub email: String,
}

impl Author {
    pub fn new(name: &str, email: &str) -> Self {
        Self {
            name: name.to_string(),
            email: email.to_string(),
        }
    }
}

impl Default for Author {
    fn default() -> Self {
        Self::new("Alice", "alice@example.com")
    }
}

/// One file operation in a scripted commit.
#[derive(Debug, Clone)]
pub enum Op {
    Write(String, Vec<u8>),
    Delete(String),
    Rename(String, String),
}

impl Op {
    pub fn write(path: &str, content: impl AsRef<[u8]>) -> Self {
        Op::Write(path.to_string(), content.as_ref().to_vec())
    }

    pub fn delete(path: &str) -> Self {
        Op::Delete(path.to_string())
    }

    pub fn rename(from: &str, to: &str) -> Self {
        Op::Rename(from.to_string(), to.to_string())
    }
}

/// A throwaway repository on branch `main` built one commit at a time.
pub struct FixtureRepo {
    dir: TempDir,
    repo: Repository,
    commits: Vec<String>,
    clock: i64,
}

impl FixtureRepo {
    pub fn new() -> Result<Self, Error> {
        let dir = tempfile::Builder::new()
            .prefix("repominer-fixture")
            .tempdir()
            .map_err(|e| Error::from_str(&e.to_string()))?;
        let mut opts = RepositoryInitOptions::new();
        opts.initial_head("main");
        let repo = Repository::init_opts(dir.path(), &opts)?;
        Ok(Self {
            dir,
            repo,
            commits: Vec::new(),
            clock: BASE_TIME,
        })
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn repository(&self) -> &Repository {
        &self.repo
    }

    /// Ids of all commits made so far, oldest first.
    pub fn commits(&self) -> &[String] {
        &self.commits
    }

    /// Commit `ops` as `author` and return the new commit id.
    pub fn commit_as(
        &mut self,
        author: &Author,
        message: &str,
        ops: &[Op],
    ) -> Result<String, Error> {
        let root = self.dir.path().to_path_buf();
        let mut index = self.repo.index()?;
        for op in ops {
            match op {
                Op::Write(path, content) => {
                    write_file(&root.join(path), content)?;
                    index.add_path(Path::new(path))?;
                }
                Op::Delete(path) => {
                    remove_file(&root.join(path))?;
                    index.remove_path(Path::new(path))?;
                }
                Op::Rename(from, to) => {
                    let content = fs::read(root.join(from)).map_err(io_err)?;
                    remove_file(&root.join(from))?;
                    index.remove_path(Path::new(from))?;
                    write_file(&root.join(to), &content)?;
                    index.add_path(Path::new(to))?;
                }
            }
        }
        index.write()?;
        let tree_id = index.write_tree()?;
        let tree = self.repo.find_tree(tree_id)?;
        let sig = Signature::new(&author.name, &author.email, &Time::new(self.clock, 0))?;
        self.clock += STEP;
        let parent = match self.repo.head() {
            Ok(head) => Some(head.peel_to_commit()?),
            Err(_) => None,
        };
        let parents: Vec<&git2::Commit<'_>> = parent.iter().collect();
        let oid = self
            .repo
            .commit(Some("HEAD"), &sig, &sig, message, &tree, &parents)?;
        let id = oid.to_string();
        self.commits.push(id.clone());
        Ok(id)
    }

    pub fn commit(&mut self, message: &str, ops: &[Op]) -> Result<String, Error> {
        self.commit_as(&Author::default(), message, ops)
    }

    /// Lightweight tag.
    pub fn tag(&self, name: &str, commit_id: &str) -> Result<(), Error> {
        let obj = self.repo.find_object(Oid::from_str(commit_id)?, None)?;
        self.repo.tag_lightweight(name, &obj, false)?;
        Ok(())
    }

    /// Annotated tag.
    pub fn tag_annotated(&self, name: &str, commit_id: &str, message: &str) -> Result<(), Error> {
        let obj = self.repo.find_object(Oid::from_str(commit_id)?, None)?;
        let sig = Signature::new("Tagger", "tagger@example.com", &Time::new(self.clock, 0))?;
        self.repo.tag(name, &obj, &sig, message, false)?;
        Ok(())
    }

    /// Create a branch pointing at `commit_id`.
    pub fn branch(&self, name: &str, commit_id: &str) -> Result<(), Error> {
        let commit = self.repo.find_commit(Oid::from_str(commit_id)?)?;
        self.repo.branch(name, &commit, false)?;
        Ok(())
    }

    /// Stage everything in the working tree; used by callers that edit files directly.
    pub fn add_all(&self) -> Result<(), Error> {
        let mut index = self.repo.index()?;
        index.add_all(["*"].iter(), IndexAddOption::DEFAULT, None)?;
        index.write()
    }

    pub fn into_tempdir(self) -> TempDir {
        self.dir
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::from_str(&e.to_string())
}

fn write_file(path: &PathBuf, content: &[u8]) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(path, content).map_err(io_err)
}

fn remove_file(path: &PathBuf) -> Result<(), Error> {
    match fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(io_err(e)),
    }
}

/// Join lines with `\n`, including a trailing newline.
pub fn lines<S: AsRef<str>>(lines: &[S]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(l.as_ref());
        out.push('\n');
    }
    out
}
