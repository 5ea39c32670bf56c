use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::process::ProcessMetrics;
use crate::error::{Error, Result};
use crate::git::CommitId;

/// Leading columns, in order.
pub const FIXED_COLUMNS: [&str; 5] = [
    "filepath",
    "commit_id",
    "release_tag",
    "committed_at",
    "failure_prone",
];

pub const DELTA_PREFIX: &str = "delta_";

/// One file at one release head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub filepath: String,
    pub commit_id: CommitId,
    pub release_tag: String,
    #[serde(with = "timestamp")]
    pub committed_at: DateTime<Utc>,
    #[serde(with = "flag")]
    pub failure_prone: bool,
    /// Metric columns; `None` is a missing value.
    #[serde(flatten)]
    pub metrics: BTreeMap<String, Option<f64>>,
}

/// Rows plus the metric columns they carry, grouped and sorted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub process_columns: Vec<String>,
    pub product_columns: Vec<String>,
    pub delta_columns: Vec<String>,
    pub rows: Vec<DatasetRow>,
}

enum Group {
    Process,
    Product,
    Delta,
}

fn group_of(name: &str) -> Group {
    if ProcessMetrics::NAMES.contains(&name) {
        Group::Process
    } else if name.starts_with(DELTA_PREFIX) {
        Group::Delta
    } else {
        Group::Product
    }
}

fn format_value(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_value(column: &str, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Dataset(format!("column {column}: not a number: {s:?}")))
}

impl Dataset {
    /// Build with columns taken from `metric_columns`, assigned to groups by name.
    pub fn with_columns<I, S>(metric_columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ds = Dataset::default();
        let names: BTreeSet<String> = metric_columns.into_iter().map(Into::into).collect();
        for name in names {
            match group_of(&name) {
                Group::Process => ds.process_columns.push(name),
                Group::Product => ds.product_columns.push(name),
                Group::Delta => ds.delta_columns.push(name),
            }
        }
        ds
    }

    pub fn metric_columns(&self) -> impl Iterator<Item = &str> {
        self.process_columns
            .iter()
            .chain(&self.product_columns)
            .chain(&self.delta_columns)
            .map(String::as_str)
    }

    pub fn header(&self) -> Vec<&str> {
        FIXED_COLUMNS
            .iter()
            .copied()
            .chain(self.metric_columns())
            .collect()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.failure_prone).count()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(self.header())?;
        let columns: Vec<&str> = self.metric_columns().collect();
        for row in &self.rows {
            let mut record = vec![
                row.filepath.clone(),
                row.commit_id.to_string(),
                row.release_tag.clone(),
                row.committed_at.to_rfc3339_opts(SecondsFormat::Secs, true),
                if row.failure_prone { "1" } else { "0" }.to_string(),
            ];
            record.extend(
                columns
                    .iter()
                    .map(|c| format_value(row.metrics.get(*c).copied().flatten())),
            );
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < FIXED_COLUMNS.len() || header[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
            return Err(Error::Dataset(format!(
                "header must start with {}",
                FIXED_COLUMNS.join(",")
            )));
        }
        let metric_names = &header[FIXED_COLUMNS.len()..];
        let mut ds = Dataset::with_columns(metric_names.iter().cloned());
        let expected: Vec<&str> = ds.metric_columns().collect();
        if expected != metric_names {
            return Err(Error::Dataset("metric columns out of order".into()));
        }
        for record in r.records() {
            let record = record?;
            let committed_at = DateTime::parse_from_rfc3339(&record[3])
                .map_err(|e| Error::Dataset(format!("committed_at: {e}")))?
                .with_timezone(&Utc);
            let failure_prone = match &record[4] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Dataset(format!(
                        "failure_prone must be 0 or 1, got {other:?}"
                    )))
                }
            };
            let mut metrics = BTreeMap::new();
            for (name, value) in metric_names
                .iter()
                .zip(record.iter().skip(FIXED_COLUMNS.len()))
            {
                metrics.insert(name.clone(), parse_value(name, value)?);
            }
            ds.rows.push(DatasetRow {
                filepath: record[0].to_string(),
                commit_id: record[1].parse()?,
                release_tag: record[2].to_string(),
                committed_at,
                failure_prone,
                metrics,
            });
        }
        Ok(ds)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// JSON array of row objects with the CSV field names.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }

    /// Inverse of [`Dataset::to_json`]; columns are recovered from the row keys.
    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<DatasetRow> = serde_json::from_str(text)?;
        let mut ds = Dataset::with_columns(rows.iter().flat_map(|r| r.metrics.keys().cloned()));
        ds.rows = rows;
        Ok(ds)
    }
}

mod timestamp {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!(
                "failure_prone must be 0 or 1, got {other}"
            ))),
        }
    }
}
