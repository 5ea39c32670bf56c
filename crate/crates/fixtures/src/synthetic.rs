//! Seeded random linear histories with known per-line authorship.
//!
//! Every line ever written is globally unique, so line-level diffs are
//! unambiguous and the writer of each line is ground truth, not an inference.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Author, Error, FixtureRepo, Op};

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub commits: usize,
    pub max_files: usize,
    pub rename_prob: f64,
    pub delete_prob: f64,
    /// Share of modifying commits whose message passes the fix gate.
    pub fix_prob: f64,
    /// Tag every n-th commit (`v1`, `v2`, ...).
    pub tag_every: Option<usize>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            commits: 30,
            max_files: 5,
            rename_prob: 0.08,
            delete_prob: 0.04,
            fix_prob: 0.3,
            tag_every: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackedLine {
    pub text: String,
    /// Index of the commit that wrote the line.
    pub writer: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EditKind {
    Created,
    Modified,
    Renamed { from: String },
    Deleted,
}

#[derive(Clone, Debug)]
pub struct FileEdit {
    pub path: String,
    pub kind: EditKind,
    /// Writers of the pre-image lines removed or rewritten by this edit.
    pub removed_writers: Vec<usize>,
    pub added: usize,
    pub removed: usize,
}

#[derive(Clone, Debug)]
pub struct CommitTruth {
    pub id: String,
    pub message: String,
    pub author_email: String,
    pub edits: Vec<FileEdit>,
    /// Repository state after the commit.
    pub files: BTreeMap<String, Vec<TrackedLine>>,
}

pub struct SyntheticHistory {
    pub repo: FixtureRepo,
    pub commits: Vec<CommitTruth>,
    /// `(tag, commit index)`, oldest first.
    pub tags: Vec<(String, usize)>,
}

const AUTHORS: [(&str, &str); 3] = [
    ("Alice", "alice@example.com"),
    ("Bob", "bob@example.com"),
    ("Carol", "carol@example.com"),
];

fn render(lines: &[TrackedLine]) -> String {
    crate::lines(&lines.iter().map(|l| l.text.as_str()).collect::<Vec<_>>())
}

struct Generator {
    rng: ChaCha8Rng,
    next_line: usize,
    next_file: usize,
}

impl Generator {
    fn new_line(&mut self, writer: usize) -> TrackedLine {
        self.next_line += 1;
        TrackedLine {
            text: format!("key{}: value{writer}", self.next_line),
            writer,
        }
    }

    fn new_path(&mut self) -> String {
        self.next_file += 1;
        format!("tasks/f{}.yml", self.next_file)
    }

    /// Rewrite `pre` in place; returns removed writers and the added count.
    fn modify(&mut self, pre: &mut Vec<TrackedLine>, writer: usize) -> (Vec<usize>, usize) {
        let len = pre.len();
        let mut idx: Vec<usize> = (0..len).collect();
        idx.shuffle(&mut self.rng);
        let n_del = self.rng.gen_range(0..=2.min(len - 1));
        let n_rep = self.rng.gen_range(0..=2.min(len - n_del));
        let mut n_ins = self.rng.gen_range(0..=2);
        if n_del + n_rep == 0 && n_ins == 0 {
            n_ins = 1;
        }
        let deleted: Vec<usize> = idx[..n_del].to_vec();
        let replaced: Vec<usize> = idx[n_del..n_del + n_rep].to_vec();
        let mut removed = Vec::new();
        let mut out = Vec::new();
        for (i, line) in pre.iter().enumerate() {
            if deleted.contains(&i) {
                removed.push(line.writer);
            } else if replaced.contains(&i) {
                removed.push(line.writer);
                out.push(self.new_line(writer));
            } else {
                out.push(line.clone());
            }
        }
        for _ in 0..n_ins {
            let pos = self.rng.gen_range(0..=out.len());
            let l = self.new_line(writer);
            out.insert(pos, l);
        }
        *pre = out;
        (removed, n_rep + n_ins)
    }
}

impl SyntheticHistory {
    pub fn generate(seed: u64, config: &SyntheticConfig) -> Result<Self, Error> {
        let mut g = Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_line: 0,
            next_file: 0,
        };
        let mut repo = FixtureRepo::new()?;
        let mut live: BTreeMap<String, Vec<TrackedLine>> = BTreeMap::new();
        let mut commits = Vec::new();
        let mut tags = Vec::new();

        for i in 0..config.commits {
            let (name, email) = AUTHORS[g.rng.gen_range(0..AUTHORS.len())];
            let author = Author::new(name, email);
            let mut ops = Vec::new();
            let mut edits = Vec::new();
            let roll: f64 = g.rng.gen();
            let mut modifying = false;

            if live.is_empty() || (live.len() < config.max_files && roll < 0.2) {
                let path = g.new_path();
                let n = g.rng.gen_range(1..=5);
                let lines: Vec<TrackedLine> = (0..n).map(|_| g.new_line(i)).collect();
                ops.push(Op::write(&path, render(&lines)));
                edits.push(FileEdit {
                    path: path.clone(),
                    kind: EditKind::Created,
                    removed_writers: vec![],
                    added: n,
                    removed: 0,
                });
                live.insert(path, lines);
            } else if roll < 0.2 + config.rename_prob {
                let paths: Vec<String> = live.keys().cloned().collect();
                let from = paths.choose(&mut g.rng).expect("non-empty").clone();
                let to = g.new_path();
                let lines = live.remove(&from).expect("live file");
                ops.push(Op::rename(&from, &to));
                edits.push(FileEdit {
                    path: to.clone(),
                    kind: EditKind::Renamed { from },
                    removed_writers: vec![],
                    added: 0,
                    removed: 0,
                });
                live.insert(to, lines);
            } else if live.len() >= 2 && roll < 0.2 + config.rename_prob + config.delete_prob {
                let paths: Vec<String> = live.keys().cloned().collect();
                let path = paths.choose(&mut g.rng).expect("non-empty").clone();
                let lines = live.remove(&path).expect("live file");
                ops.push(Op::delete(&path));
                edits.push(FileEdit {
                    path,
                    kind: EditKind::Deleted,
                    removed_writers: lines.iter().map(|l| l.writer).collect(),
                    added: 0,
                    removed: lines.len(),
                });
            } else {
                modifying = true;
                let mut paths: Vec<String> = live.keys().cloned().collect();
                paths.shuffle(&mut g.rng);
                let n = g.rng.gen_range(1..=2.min(paths.len()));
                for path in paths.into_iter().take(n) {
                    let lines = live.get_mut(&path).expect("live file");
                    let before = lines.len();
                    let (removed_writers, added) = g.modify(lines, i);
                    ops.push(Op::write(&path, render(lines)));
                    let removed = before + added - lines.len();
                    edits.push(FileEdit {
                        path,
                        kind: EditKind::Modified,
                        removed_writers,
                        added,
                        removed,
                    });
                }
            }

            let message = if modifying && g.rng.gen_bool(config.fix_prob) {
                format!("fix config error #{i}")
            } else {
                format!("change {i}")
            };
            let id = repo.commit_as(&author, &message, &ops)?;
            if let Some(every) = config.tag_every {
                if (i + 1) % every == 0 {
                    let tag = format!("v{}", tags.len() + 1);
                    repo.tag(&tag, &id)?;
                    tags.push((tag, i));
                }
            }
            commits.push(CommitTruth {
                id,
                message,
                author_email: email.to_string(),
                edits,
                files: live.clone(),
            });
        }
        Ok(Self {
            repo,
            commits,
            tags,
        })
    }

    /// Index of the commit that last wrote 1-based `line` of `path` as of `commit`.
    pub fn last_writer(&self, commit: usize, path: &str, line: usize) -> Option<usize> {
        self.commits[commit]
            .files
            .get(path)?
            .get(line.checked_sub(1)?)
            .map(|l| l.writer)
    }

    /// Oldest writer among the lines that `commit` removed from `path`;
    /// `None` for pure additions or when `path` was not modified there.
    pub fn oracle_bic(&self, commit: usize, path: &str) -> Option<usize> {
        self.commits[commit]
            .edits
            .iter()
            .find(|e| e.path == path && e.kind == EditKind::Modified)?
            .removed_writers
            .iter()
            .copied()
            .min()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.commits.iter().position(|c| c.id == id)
    }

    pub fn is_fix(&self, commit: usize) -> bool {
        self.commits[commit].message.starts_with("fix ")
    }

    /// Per commit, the lineage id of every live path. A rename keeps the
    /// lineage; a creation starts a new one.
    pub fn lineages(&self) -> Vec<BTreeMap<String, usize>> {
        let mut next = 0;
        let mut live: BTreeMap<String, usize> = BTreeMap::new();
        let mut out = Vec::with_capacity(self.commits.len());
        for c in &self.commits {
            for e in &c.edits {
                match &e.kind {
                    EditKind::Created => {
                        live.insert(e.path.clone(), next);
                        next += 1;
                    }
                    EditKind::Renamed { from } => {
                        let l = live.remove(from).expect("renamed file was live");
                        live.insert(e.path.clone(), l);
                    }
                    EditKind::Deleted => {
                        live.remove(&e.path);
                    }
                    EditKind::Modified => {}
                }
            }
            out.push(live.clone());
        }
        out
    }

    /// Defect intervals from ground truth: `(path at fic, bic, fic)` as
    /// commit indices, newest fix first. Walking fixes newest first, a new
    /// interval on a lineage is kept when it ends before the last recorded
    /// one begins, widens it when it straddles its start, and is otherwise
    /// absorbed.
    pub fn oracle_intervals(&self) -> Vec<(String, usize, usize)> {
        let fixes: BTreeSet<usize> = (0..self.commits.len())
            .filter(|&i| self.is_fix(i))
            .collect();
        self.oracle_intervals_for(&fixes)
    }

    /// As [`Self::oracle_intervals`], treating exactly `fixes` as fixing commits.
    pub fn oracle_intervals_for(&self, fixes: &BTreeSet<usize>) -> Vec<(String, usize, usize)> {
        let lineages = self.lineages();
        let mut recorded: Vec<(usize, String, usize, usize)> = Vec::new();
        for &fic in fixes.iter().rev() {
            let mut edits: Vec<&FileEdit> = self.commits[fic].edits.iter().collect();
            edits.sort_by(|a, b| a.path.cmp(&b.path));
            for e in edits {
                let Some(bic) = self.oracle_bic(fic, &e.path) else {
                    continue;
                };
                let lineage = lineages[fic][&e.path];
                let last = recorded.iter_mut().rev().find(|r| r.0 == lineage);
                match last {
                    Some(r) if fic >= r.2 => {
                        if bic < r.2 && r.2 < fic {
                            r.2 = bic;
                        }
                    }
                    _ => recorded.push((lineage, e.path.clone(), bic, fic)),
                }
            }
        }
        recorded.into_iter().map(|(_, p, b, f)| (p, b, f)).collect()
    }

    /// Failure-prone snapshots from ground truth: `(path at c, c, fic)`.
    pub fn oracle_snapshots(&self) -> BTreeSet<(String, usize, usize)> {
        self.snapshots_of(&self.oracle_intervals())
    }

    /// Every `(path at c, c, fic)` with `bic <= c < fic` for the given intervals.
    pub fn snapshots_of(
        &self,
        intervals: &[(String, usize, usize)],
    ) -> BTreeSet<(String, usize, usize)> {
        let lineages = self.lineages();
        let mut out = BTreeSet::new();
        for (path, bic, fic) in intervals.iter().cloned() {
            let lineage = lineages[fic][&path];
            for (c, live) in lineages.iter().enumerate().take(fic).skip(bic) {
                if let Some((p, _)) = live.iter().find(|(_, &l)| l == lineage) {
                    out.insert((p.clone(), c, fic));
                }
            }
        }
        out
    }
}
