use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("clone path required for remote repository {0}")]
    ClonePathRequired(String),

    #[error("repository not found at {}", .0.display())]
    RepositoryNotFound(PathBuf),

    #[error("failed to clone {url}: {source}")]
    Clone {
        url: String,
        #[source]
        source: git2::Error,
    },

    #[error("unknown branch: {0}")]
    UnknownBranch(String),

    #[error("shallow repository rejected: blame requires full history")]
    ShallowRepository,

    #[error("unknown commit: {0}")]
    UnknownCommit(String),

    #[error("path absent at {commit}: {path}")]
    PathAbsent { commit: String, path: String },

    #[error("binary file: {0}")]
    BinaryFile(String),

    #[error("line {line} out of range for {path} ({len} lines)")]
    LineOutOfRange {
        path: String,
        line: usize,
        len: usize,
    },

    #[error("no blame anchor for {path} in {commit}")]
    NoBlameAnchor { commit: String, path: String },

    #[error("invalid rules: {0}")]
    Rules(String),

    #[error("invalid regex {pattern:?} for {category}: {source}")]
    Regex {
        category: String,
        pattern: String,
        #[source]
        source: regex::Error,
    },

    #[error("no releases: the release-granular dataset is undefined")]
    NoReleases,

    #[error("invalid metric kinds: {0}")]
    MetricKinds(String),

    #[error("metric name sets differ: {0}")]
    MetricMismatch(String),

    #[error("invalid report: {0}")]
    Report(String),

    #[error("report schema version {found} is newer than supported version {supported}")]
    ReportVersion { found: u32, supported: u32 },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Git(#[from] git2::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the repository itself (opening, cloning,
    /// unknown branches and the like) rather than by user input.
    pub fn is_repository_error(&self) -> bool {
        matches!(
            self,
            Error::RepositoryNotFound(_)
                | Error::Clone { .. }
                | Error::UnknownBranch(_)
                | Error::ShallowRepository
                | Error::UnknownCommit(_)
                | Error::Git(_)
        )
    }
}
