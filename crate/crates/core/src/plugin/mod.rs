//! Language plugins: the file filter, the commit filter and the product
//! metrics that specialize mining to one language.

use std::collections::BTreeMap;

use crate::git::FileChange;

mod generic;
mod yaml;

pub use generic::GenericExtensionPlugin;
pub use yaml::YamlConfigPlugin;

/// Product metrics of one file snapshot, keyed by metric name.
pub type ProductMetrics = BTreeMap<String, f64>;

/// Names accepted by [`plugin_by_name`].
pub const REGISTERED_PLUGINS: [&str; 2] = [YamlConfigPlugin::NAME, GenericExtensionPlugin::NAME];

pub trait LanguagePlugin: Send + Sync {
    fn name(&self) -> &str;

    /// Whether to leave `path` out of the analysis. `content` is available to
    /// plugins that sniff file contents; it must not change the answer for
    /// paths the plugin decides on alone.
    fn ignore_file(&self, path: &str, content: Option<&str>) -> bool;

    /// Whether a change touches a file of this language.
    fn is_language_change(&self, change: &FileChange) -> bool {
        !self.ignore_file(change.path(), None)
    }

    /// Line comment marker, used to drop comment lines before blame.
    fn comment_marker(&self) -> Option<&str>;

    /// Metric names produced by [`LanguagePlugin::product_metrics`], sorted.
    fn product_metric_names(&self) -> Vec<String>;

    fn product_metrics(&self, content: &str) -> Result<ProductMetrics, String>;
}

#[derive(Debug, thiserror::Error)]
pub enum PluginError {
    #[error("unknown language plugin {name:?}; registered plugins: {}", REGISTERED_PLUGINS.join(", "))]
    Unknown { name: String },
    #[error("plugin \"generic\" needs at least one extension (--ext)")]
    MissingExtensions,
}

/// Look up a plugin by registry name. `extensions` configures the generic
/// plugin and is ignored otherwise.
pub fn plugin_by_name(
    name: &str,
    extensions: &[String],
    comment_marker: Option<&str>,
) -> Result<Box<dyn LanguagePlugin>, PluginError> {
    match name {
        YamlConfigPlugin::NAME => Ok(Box::new(YamlConfigPlugin)),
        GenericExtensionPlugin::NAME => Ok(Box::new(GenericExtensionPlugin::new(
            extensions,
            comment_marker.map(str::to_string),
        )?)),
        other => Err(PluginError::Unknown {
            name: other.to_string(),
        }),
    }
}

/// Blank / comment / code line counts.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LineCounts {
    pub total: usize,
    pub code: usize,
    pub comment: usize,
    pub blank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LineClass {
    Blank,
    Comment,
    Code,
}

pub(crate) fn classify_line(line: &str, comment_marker: Option<&str>) -> LineClass {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        LineClass::Blank
    } else if comment_marker.is_some_and(|m| trimmed.starts_with(m)) {
        LineClass::Comment
    } else {
        LineClass::Code
    }
}

pub(crate) fn count_lines(content: &str, comment_marker: Option<&str>) -> LineCounts {
    let mut counts = LineCounts::default();
    for line in content.lines() {
        counts.total += 1;
        match classify_line(line, comment_marker) {
            LineClass::Blank => counts.blank += 1,
            LineClass::Comment => counts.comment += 1,
            LineClass::Code => counts.code += 1,
        }
    }
    counts
}

pub(crate) fn line_metrics(counts: LineCounts) -> ProductMetrics {
    ProductMetrics::from([
        ("lines_blank".to_string(), counts.blank as f64),
        ("lines_code".to_string(), counts.code as f64),
        ("lines_comment".to_string(), counts.comment as f64),
        ("lines_total".to_string(), counts.total as f64),
    ])
}

/// Lowercased extension without the dot.
pub(crate) fn extension(path: &str) -> Option<String> {
    let name = path.rsplit('/').next()?;
    let (stem, ext) = name.rsplit_once('.')?;
    if stem.is_empty() {
        return None;
    }
    Some(ext.to_ascii_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry() {
        assert_eq!(
            plugin_by_name("yaml-config", &[], None).unwrap().name(),
            "yaml-config"
        );
        let g = plugin_by_name("generic", &["py".into()], Some("#")).unwrap();
        assert_eq!(g.name(), "generic");
        assert!(matches!(
            plugin_by_name("generic", &[], None),
            Err(PluginError::MissingExtensions)
        ));
        let err = plugin_by_name("cobol", &[], None)
            .err()
            .unwrap()
            .to_string();
        assert!(
            err.contains("yaml-config") && err.contains("generic"),
            "{err}"
        );
    }

    #[test]
    fn extensions() {
        assert_eq!(extension("a/b/main.YML").as_deref(), Some("yml"));
        assert_eq!(extension("Makefile"), None);
        assert_eq!(extension(".gitignore"), None);
        assert_eq!(extension("dir.d/file"), None);
    }
}
