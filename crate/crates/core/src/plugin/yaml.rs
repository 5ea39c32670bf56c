use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use super::{classify_line, extension, LanguagePlugin, LineClass, ProductMetrics};

const EXTENSIONS: [&str; 2] = ["yml", "yaml"];
const ROOTS: [&str; 5] = ["playbooks", "meta", "tasks", "handlers", "roles"];
const COMMENT: &str = "#";

/// YAML configuration files laid out like an Ansible project.
///
/// A `.yml`/`.yaml` file is analyzed when it sits at the repository root or
/// when any of its directories is one of `playbooks`, `meta`, `tasks`,
/// `handlers` or `roles`.
#[derive(Debug, Clone, Copy, Default)]
pub struct YamlConfigPlugin;

impl YamlConfigPlugin {
    pub const NAME: &'static str = "yaml-config";

    pub const METRICS: [&'static str; 8] = [
        "lines_blank",
        "lines_code",
        "lines_comment",
        "lines_total",
        "max_nesting_depth",
        "num_entities",
        "num_tokens",
        "text_entropy",
    ];
}

fn key_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[^\s#-][^:]*:(\s|$)").expect("valid regex"))
}

/// Indentation in nesting levels: two spaces or one tab per level.
fn nesting_level(line: &str) -> usize {
    let mut columns = 0;
    for ch in line.chars() {
        match ch {
            ' ' => columns += 1,
            '\t' => columns += 2,
            _ => break,
        }
    }
    columns / 2
}

/// Shannon entropy (base 2) of the token frequency distribution.
pub(crate) fn token_entropy<'a>(tokens: impl IntoIterator<Item = &'a str>) -> f64 {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    let mut total = 0usize;
    for t in tokens {
        *freq.entry(t).or_default() += 1;
        total += 1;
    }
    if freq.len() <= 1 {
        return 0.0;
    }
    let n = total as f64;
    let mut counts: Vec<usize> = freq.into_values().collect();
    // Fixed summation order keeps the result bit-reproducible.
    counts.sort_unstable();
    -counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

impl LanguagePlugin for YamlConfigPlugin {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn ignore_file(&self, path: &str, _content: Option<&str>) -> bool {
        if !extension(path).is_some_and(|e| EXTENSIONS.contains(&e.as_str())) {
            return true;
        }
        let mut segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        segments.pop();
        let at_root = segments.is_empty();
        !(at_root || segments.iter().any(|s| ROOTS.contains(s)))
    }

    fn comment_marker(&self) -> Option<&str> {
        Some(COMMENT)
    }

    fn product_metric_names(&self) -> Vec<String> {
        Self::METRICS.map(String::from).to_vec()
    }

    fn product_metrics(&self, content: &str) -> Result<ProductMetrics, String> {
        let (mut total, mut code, mut comment, mut blank) = (0usize, 0usize, 0usize, 0usize);
        let mut entities = 0usize;
        let mut depth = 0usize;
        let mut tokens: Vec<&str> = Vec::new();
        for line in content.lines() {
            total += 1;
            match classify_line(line, Some(COMMENT)) {
                LineClass::Blank => {
                    blank += 1;
                    continue;
                }
                LineClass::Comment => comment += 1,
                LineClass::Code => {
                    code += 1;
                    if key_line().is_match(line.trim_start()) {
                        let level = nesting_level(line);
                        if level == 0 && !line.starts_with(char::is_whitespace) {
                            entities += 1;
                        }
                        depth = depth.max(level);
                    }
                }
            }
            tokens.extend(line.split_whitespace());
        }
        let entropy = token_entropy(tokens.iter().copied());
        Ok(ProductMetrics::from([
            ("lines_blank".to_string(), blank as f64),
            ("lines_code".to_string(), code as f64),
            ("lines_comment".to_string(), comment as f64),
            ("lines_total".to_string(), total as f64),
            ("max_nesting_depth".to_string(), depth as f64),
            ("num_entities".to_string(), entities as f64),
            ("num_tokens".to_string(), tokens.len() as f64),
            ("text_entropy".to_string(), entropy),
        ]))
    }
}
