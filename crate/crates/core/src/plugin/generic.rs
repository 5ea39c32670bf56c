use std::collections::BTreeSet;

use super::{count_lines, extension, line_metrics, LanguagePlugin, PluginError, ProductMetrics};

/// Accepts files by extension and measures them line-wise.
#[derive(Debug, Clone)]
pub struct GenericExtensionPlugin {
    extensions: BTreeSet<String>,
    comment_marker: Option<String>,
}

impl GenericExtensionPlugin {
    pub const NAME: &'static str = "generic";

    /// Extensions are matched case-insensitively, with or without a leading dot.
    pub fn new<S: AsRef<str>>(
        extensions: &[S],
        comment_marker: Option<String>,
    ) -> Result<Self, PluginError> {
        let extensions: BTreeSet<String> = extensions
            .iter()
            .map(|e| {
                e.as_ref()
                    .trim()
                    .trim_start_matches('.')
                    .to_ascii_lowercase()
            })
            .filter(|e| !e.is_empty())
            .collect();
        if extensions.is_empty() {
            return Err(PluginError::MissingExtensions);
        }
        Ok(Self {
            extensions,
            comment_marker: comment_marker.filter(|m| !m.is_empty()),
        })
    }

    pub fn extensions(&self) -> impl Iterator<Item = &str> {
        self.extensions.iter().map(String::as_str)
    }
}

impl LanguagePlugin for GenericExtensionPlugin {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn ignore_file(&self, path: &str, _content: Option<&str>) -> bool {
        !extension(path).is_some_and(|e| self.extensions.contains(&e))
    }

    fn comment_marker(&self) -> Option<&str> {
        self.comment_marker.as_deref()
    }

    fn product_metric_names(&self) -> Vec<String> {
        ["lines_blank", "lines_code", "lines_comment", "lines_total"]
            .map(String::from)
            .to_vec()
    }

    fn product_metrics(&self, content: &str) -> Result<ProductMetrics, String> {
        Ok(line_metrics(count_lines(content, self.comment_marker())))
    }
}
