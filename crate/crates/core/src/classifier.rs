//! Keyword classification of defect-fixing commits.
//!
//! A commit fixes a category when its message passes the fix gate and either
//! the message or one of its changed lines matches a pattern of that category.
//! Changed lines are matched with their diff marker, e.g. `+key: value` or
//! `-state: present`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::git::{CommitId, CommitInfo, FileChange};

/// Current version of the rule file schema.
pub const RULES_SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_FIX_GATE: &str = r"fix(e[ds])?|bug|defect|fault|patch|repair|resolv|error";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectCategory {
    Conditionals,
    ConfigurationData,
    Dependencies,
    Documentation,
    Idempotency,
    Security,
    Service,
    Syntax,
}

impl DefectCategory {
    pub const ALL: [DefectCategory; 8] = [
        DefectCategory::Conditionals,
        DefectCategory::ConfigurationData,
        DefectCategory::Dependencies,
        DefectCategory::Documentation,
        DefectCategory::Idempotency,
        DefectCategory::Security,
        DefectCategory::Service,
        DefectCategory::Syntax,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DefectCategory::Conditionals => "conditionals",
            DefectCategory::ConfigurationData => "configuration_data",
            DefectCategory::Dependencies => "dependencies",
            DefectCategory::Documentation => "documentation",
            DefectCategory::Idempotency => "idempotency",
            DefectCategory::Security => "security",
            DefectCategory::Service => "service",
            DefectCategory::Syntax => "syntax",
        }
    }

    pub fn default_message_patterns(self) -> &'static [&'static str] {
        match self {
            DefectCategory::Conditionals => &["condition|if statement|boolean|logic"],
            DefectCategory::ConfigurationData => {
                &["config|configuration|setting|parameter|default value"]
            }
            DefectCategory::Dependencies => &["depend|requirement|bump|upgrade|package version"],
            DefectCategory::Documentation => &["doc|readme|comment|typo"],
            DefectCategory::Idempotency => &["idempoten|state|creates|unless"],
            DefectCategory::Security => &["secur|vulnerab|cve|xss|inject|credential|auth"],
            DefectCategory::Service => &["service|daemon|restart|systemd|unit"],
            DefectCategory::Syntax => &["syntax|typo|lint|indent|format|compile error"],
        }
    }

    pub fn default_diff_patterns(self) -> &'static [&'static str] {
        match self {
            DefectCategory::ConfigurationData => &[r"^[+-]\s*\w+\s*[:=]"],
            DefectCategory::Idempotency => &[r"creates|unless|changed_when|state\s*[:=]"],
            _ => &[],
        }
    }
}

impl fmt::Display for DefectCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DefectCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DefectCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Rules(format!("unknown defect category {s:?}")))
    }
}

/// A commit identified as defect-fixing, with the categories it fixes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixingCommitRecord {
    pub commit_id: CommitId,
    pub categories: BTreeSet<DefectCategory>,
}

/// Compiled classification rules.
#[derive(Clone, Debug)]
pub struct RuleSet {
    fix_gate: Vec<Regex>,
    message_patterns: BTreeMap<DefectCategory, Vec<Regex>>,
    diff_patterns: BTreeMap<DefectCategory, Vec<Regex>>,
}

fn compile(category: &str, pattern: &str) -> Result<Regex> {
    RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|source| Error::Regex {
            category: category.to_string(),
            pattern: pattern.to_string(),
            source,
        })
}

fn compile_all<S: AsRef<str>>(category: &str, patterns: &[S]) -> Result<Vec<Regex>> {
    patterns
        .iter()
        .map(|p| compile(category, p.as_ref()))
        .collect()
}

impl Default for RuleSet {
    fn default() -> Self {
        let mut message_patterns = BTreeMap::new();
        let mut diff_patterns = BTreeMap::new();
        for c in DefectCategory::ALL {
            message_patterns.insert(
                c,
                compile_all(c.as_str(), c.default_message_patterns())
                    .expect("default patterns compile"),
            );
            diff_patterns.insert(
                c,
                compile_all(c.as_str(), c.default_diff_patterns())
                    .expect("default patterns compile"),
            );
        }
        Self {
            fix_gate: vec![compile("fix_gate", DEFAULT_FIX_GATE).expect("default gate compiles")],
            message_patterns,
            diff_patterns,
        }
    }
}

/// On-disk rule file. Categories left out keep their default patterns.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    version: Option<u32>,
    fix_gate: Option<Vec<String>>,
    #[serde(default)]
    message_patterns: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    diff_patterns: BTreeMap<String, Vec<String>>,
}

impl RuleSet {
    /// Build from pattern strings, validating every invariant.
    pub fn from_patterns(
        fix_gate: &[String],
        message_patterns: &BTreeMap<DefectCategory, Vec<String>>,
        diff_patterns: &BTreeMap<DefectCategory, Vec<String>>,
    ) -> Result<Self> {
        if fix_gate.is_empty() {
            return Err(Error::Rules("fix_gate must not be empty".into()));
        }
        let mut rules = Self {
            fix_gate: compile_all("fix_gate", fix_gate)?,
            message_patterns: BTreeMap::new(),
            diff_patterns: BTreeMap::new(),
        };
        for c in DefectCategory::ALL {
            let msg = message_patterns
                .get(&c)
                .map(Vec::as_slice)
                .unwrap_or_default();
            let diff = diff_patterns.get(&c).map(Vec::as_slice).unwrap_or_default();
            rules
                .message_patterns
                .insert(c, compile_all(c.as_str(), msg)?);
            rules
                .diff_patterns
                .insert(c, compile_all(c.as_str(), diff)?);
        }
        Ok(rules)
    }

    /// Parse a TOML rule file, merging defaults for whatever it leaves out.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: RuleFile = toml::from_str(text).map_err(|e| Error::Rules(e.to_string()))?;
        if let Some(v) = file.version {
            if v != RULES_SCHEMA_VERSION {
                return Err(Error::Rules(format!(
                    "unsupported rule file version {v} (expected {RULES_SCHEMA_VERSION})"
                )));
            }
        }
        let mut rules = RuleSet::default();
        if let Some(gate) = file.fix_gate {
            if gate.is_empty() {
                return Err(Error::Rules("fix_gate must not be empty".into()));
            }
            rules.fix_gate = compile_all("fix_gate", &gate)?;
        }
        for (name, patterns) in &file.message_patterns {
            let c: DefectCategory = name.parse()?;
            rules
                .message_patterns
                .insert(c, compile_all(c.as_str(), patterns)?);
        }
        for (name, patterns) in &file.diff_patterns {
            let c: DefectCategory = name.parse()?;
            rules
                .diff_patterns
                .insert(c, compile_all(c.as_str(), patterns)?);
        }
        Ok(rules)
    }

    pub fn fix_gate(&self) -> &[Regex] {
        &self.fix_gate
    }

    pub fn message_patterns(&self, category: DefectCategory) -> &[Regex] {
        self.message_patterns
            .get(&category)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn diff_patterns(&self, category: DefectCategory) -> &[Regex] {
        self.diff_patterns
            .get(&category)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn passes_gate(&self, message: &str) -> bool {
        self.fix_gate.iter().any(|r| r.is_match(message))
    }

    pub fn matches(&self, category: DefectCategory, message: &str, changes: &[FileChange]) -> bool {
        if !self.passes_gate(message) {
            return false;
        }
        if self
            .message_patterns(category)
            .iter()
            .any(|r| r.is_match(message))
        {
            return true;
        }
        let diff = self.diff_patterns(category);
        if diff.is_empty() {
            return false;
        }
        changes.iter().any(|change| {
            let added = change.added_lines.iter().map(|(_, t)| ('+', t));
            let deleted = change.deleted_lines.iter().map(|(_, t)| ('-', t));
            added.chain(deleted).any(|(marker, text)| {
                let line = format!("{marker}{text}");
                diff.iter().any(|r| r.is_match(&line))
            })
        })
    }

    pub fn classify(&self, message: &str, changes: &[FileChange]) -> BTreeSet<DefectCategory> {
        if !self.passes_gate(message) {
            return BTreeSet::new();
        }
        DefectCategory::ALL
            .into_iter()
            .filter(|&c| self.matches(c, message, changes))
            .collect()
    }
}

pub fn category_matches(
    category: DefectCategory,
    commit: &CommitInfo,
    changes: &[FileChange],
    rules: &RuleSet,
) -> bool {
    rules.matches(category, &commit.message, changes)
}

/// Categories fixed by `commit`; empty when it is not a fixing commit.
pub fn classify(
    commit: &CommitInfo,
    changes: &[FileChange],
    rules: &RuleSet,
) -> BTreeSet<DefectCategory> {
    rules.classify(&commit.message, changes)
}

/// Load rules from `path`, or the built-in table when no path is given.
pub fn load_rules(path: Option<&Path>) -> Result<RuleSet> {
    match path {
        None => Ok(RuleSet::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Rules(format!("{}: {e}", p.display())))?;
            RuleSet::from_toml(&text)
        }
    }
}
