//! Mine git repositories for defect-prediction datasets.
//!
//! The pipeline runs in three mining steps followed by metric extraction:
//!
//! 1. [`identify_fixing_commits`] classifies every commit on the first-parent
//!    history with a keyword [`RuleSet`] and keeps those touching files of the
//!    chosen [`LanguagePlugin`].
//! 2. [`identify_fixed_files`] runs SZZ on every modified language file of
//!    those commits to find its bug-introducing commit, and merges the
//!    resulting `[bic, fic)` intervals per file.
//! 3. [`label_snapshots`] emits every snapshot inside those intervals as a
//!    [`FailureProneFile`].
//! 4. [`extract`] builds a per-release [`Dataset`] with process, product and
//!    delta metrics and the failure-prone label.

pub mod classifier;
pub mod error;
pub mod git;
pub mod metrics;
pub mod miner;
pub mod plugin;
pub mod report;
pub mod szz;

pub use classifier::{
    category_matches, classify, load_rules, DefectCategory, FixingCommitRecord, RuleSet,
};
pub use error::{Error, Result};
pub use git::{
    open_session, ChangeKind, CommitId, CommitInfo, CommitOrder, FileChange, Location, Release,
    RepositorySession, RepositorySource,
};
pub use metrics::{
    delta_metrics, extract, get_process_metrics, Dataset, DatasetRow, MetricKind, MetricKinds,
    ProcessMetrics,
};
pub use miner::{
    identify_fixed_files, identify_fixing_commits, label_snapshots, merge_rule, FailureProneFile,
    FixedFile, IntervalMerge,
};
pub use plugin::{
    plugin_by_name, GenericExtensionPlugin, LanguagePlugin, PluginError, ProductMetrics,
    YamlConfigPlugin, REGISTERED_PLUGINS,
};
pub use report::{mine, read_report, write_report, MiningOutput, MiningReport, MiningStage};
pub use szz::{bug_introducing_commit, SzzQuery};
