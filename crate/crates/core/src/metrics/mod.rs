//! Process, product and delta metrics, and the labelled dataset built from
//! them: one row per language file per release head.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::git::{self, CommitId, RepositorySession};
use crate::miner::FailureProneFile;
use crate::plugin::{LanguagePlugin, ProductMetrics};

mod dataset;
mod process;

pub use dataset::{Dataset, DatasetRow, DELTA_PREFIX, FIXED_COLUMNS};
pub use process::{get_process_metrics, ProcessMetrics, MINOR_CONTRIBUTOR_SHARE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Process,
    Product,
    Delta,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Process => "process",
            MetricKind::Product => "product",
            MetricKind::Delta => "delta",
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "process" => Ok(MetricKind::Process),
            "product" => Ok(MetricKind::Product),
            "delta" => Ok(MetricKind::Delta),
            other => Err(Error::MetricKinds(format!("unknown metric kind {other:?}"))),
        }
    }
}

/// A non-empty set of metric kinds in which delta implies product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricKinds(BTreeSet<MetricKind>);

impl MetricKinds {
    pub fn new(kinds: impl IntoIterator<Item = MetricKind>) -> Result<Self> {
        let kinds: BTreeSet<MetricKind> = kinds.into_iter().collect();
        if kinds.is_empty() {
            return Err(Error::MetricKinds(
                "at least one metric kind is required".into(),
            ));
        }
        if kinds.contains(&MetricKind::Delta) && !kinds.contains(&MetricKind::Product) {
            return Err(Error::MetricKinds(
                "delta metrics require product metrics".into(),
            ));
        }
        Ok(Self(kinds))
    }

    pub fn all() -> Self {
        Self([MetricKind::Process, MetricKind::Product, MetricKind::Delta].into())
    }

    pub fn contains(&self, kind: MetricKind) -> bool {
        self.0.contains(&kind)
    }
}

impl FromStr for MetricKinds {
    type Err = Error;

    /// Comma-separated, e.g. `process,product`.
    fn from_str(s: &str) -> Result<Self> {
        let kinds = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<MetricKind>>>()?;
        Self::new(kinds)
    }
}

impl fmt::Display for MetricKinds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|k| k.as_str()).collect();
        f.write_str(&names.join(","))
    }
}

/// Release-over-release differences of product metrics, keyed
/// `delta_<name>`. A file new in this release is compared against zero.
pub fn delta_metrics(
    current: &ProductMetrics,
    previous: Option<&ProductMetrics>,
) -> Result<BTreeMap<String, f64>> {
    if let Some(prev) = previous {
        if !current.keys().eq(prev.keys()) {
            let cur: Vec<&str> = current.keys().map(String::as_str).collect();
            let old: Vec<&str> = prev.keys().map(String::as_str).collect();
            return Err(Error::MetricMismatch(format!("{cur:?} vs {old:?}")));
        }
    }
    Ok(current
        .iter()
        .map(|(name, value)| {
            let base = previous.and_then(|p| p.get(name)).copied().unwrap_or(0.0);
            (format!("{DELTA_PREFIX}{name}"), value - base)
        })
        .collect())
}

/// Build the labelled dataset: one row per analyzed file present at each
/// release head, ordered by release and path. A row is failure-prone when
/// a snapshot of that path at that head appears in `failure_prone`.
pub fn extract(
    session: &RepositorySession,
    failure_prone: &[FailureProneFile],
    kinds: &MetricKinds,
    plugin: &dyn LanguagePlugin,
) -> Result<Dataset> {
    let releases = session.releases()?;
    if releases.is_empty() {
        return Err(Error::NoReleases);
    }
    let positives: HashSet<(&str, &CommitId)> = failure_prone
        .iter()
        .map(|f| (f.filepath.as_str(), &f.commit_id))
        .collect();

    let mut columns: Vec<String> = Vec::new();
    if kinds.contains(MetricKind::Process) {
        columns.extend(ProcessMetrics::NAMES.iter().map(|s| s.to_string()));
    }
    let product_names = plugin.product_metric_names();
    if kinds.contains(MetricKind::Product) {
        columns.extend(product_names.iter().cloned());
    }
    if kinds.contains(MetricKind::Delta) {
        columns.extend(product_names.iter().map(|n| format!("{DELTA_PREFIX}{n}")));
    }
    let mut dataset = Dataset::with_columns(columns);

    let mut previous_product: HashMap<String, Option<ProductMetrics>> = HashMap::new();
    for (i, release) in releases.iter().enumerate() {
        let head = &release.head_commit_id;
        let committed_at = session
            .commit(head)
            .map(|c| c.committed_at)
            .unwrap_or(release.tagged_at);

        let mut files: Vec<(String, String)> = Vec::new();
        for path in session.files_at(head)? {
            if plugin.ignore_file(&path, None) {
                continue;
            }
            let bytes = session.blob_at(head, &path)?;
            if git::is_binary(&bytes) {
                log::debug!("skipping binary {path} at {}", release.tag_name);
                continue;
            }
            files.push((path, String::from_utf8_lossy(&bytes).into_owned()));
        }

        let process = if kinds.contains(MetricKind::Process) {
            Some(process::process_metrics_for(
                session,
                release,
                i.checked_sub(1).map(|p| &releases[p]),
            )?)
        } else {
            None
        };

        let product: Vec<Option<ProductMetrics>> = if kinds.contains(MetricKind::Product) {
            files
                .par_iter()
                .map(|(path, text)| match plugin.product_metrics(text) {
                    Ok(m) => Some(m),
                    Err(e) => {
                        log::warn!(
                            "product metrics failed for {path} at {}: {e}",
                            release.tag_name
                        );
                        None
                    }
                })
                .collect()
        } else {
            vec![None; files.len()]
        };

        let mut current_product = HashMap::new();
        for ((path, _), product) in files.iter().zip(product) {
            let mut metrics: BTreeMap<String, Option<f64>> = dataset
                .metric_columns()
                .map(|c| (c.to_string(), None))
                .collect();
            if let Some(process) = &process {
                let m = process.get(path).cloned().unwrap_or_default();
                metrics.extend(m.to_map().into_iter().map(|(k, v)| (k, Some(v))));
            }
            if let Some(current) = &product {
                metrics.extend(current.iter().map(|(k, v)| (k.clone(), Some(*v))));
                if kinds.contains(MetricKind::Delta) {
                    let delta = match previous_product.get(path) {
                        None => delta_metrics(current, None).ok(),
                        Some(Some(prev)) => delta_metrics(current, Some(prev))
                            .map_err(|e| log::warn!("{path}: {e}"))
                            .ok(),
                        Some(None) => None,
                    };
                    if let Some(delta) = delta {
                        metrics.extend(delta.into_iter().map(|(k, v)| (k, Some(v))));
                    }
                }
            }
            current_product.insert(path.clone(), product.clone());
            dataset.rows.push(DatasetRow {
                failure_prone: positives.contains(&(path.as_str(), head)),
                filepath: path.clone(),
                commit_id: head.clone(),
                release_tag: release.tag_name.clone(),
                committed_at,
                metrics,
            });
        }
        previous_product = current_product;
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(v: &[(&str, f64)]) -> ProductMetrics {
        v.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn delta_against_previous() {
        let d = delta_metrics(&pm(&[("loc", 12.0)]), Some(&pm(&[("loc", 10.0)]))).unwrap();
        assert_eq!(d, BTreeMap::from([("delta_loc".to_string(), 2.0)]));
    }

    #[test]
    fn delta_without_previous() {
        let d = delta_metrics(&pm(&[("loc", 7.0)]), None).unwrap();
        assert_eq!(d, BTreeMap::from([("delta_loc".to_string(), 7.0)]));
    }

    #[test]
    fn delta_name_mismatch() {
        let err = delta_metrics(
            &pm(&[("loc", 5.0), ("depth", 2.0)]),
            Some(&pm(&[("loc", 5.0)])),
        );
        assert!(matches!(err, Err(Error::MetricMismatch(_))));
    }

    #[test]
    fn metric_kind_parsing() {
        assert!("process,product,delta".parse::<MetricKinds>().is_ok());
        assert!("product, delta".parse::<MetricKinds>().is_ok());
        assert!(matches!(
            "delta".parse::<MetricKinds>(),
            Err(Error::MetricKinds(_))
        ));
        assert!("".parse::<MetricKinds>().is_err());
        assert!("size".parse::<MetricKinds>().is_err());
        assert_eq!(
            "delta,product".parse::<MetricKinds>().unwrap().to_string(),
            "product,delta"
        );
    }
}
