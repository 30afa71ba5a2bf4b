//! Result tables with lossless text round trips.
//!
//! Accuracies are stored as integer `correct` / `total` counts and seconds
//! with full float precision, so a table written in either format and read
//! back compares equal to the original.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Method;

const TSV_MAGIC: &str = "#results-table v1";
const TSV_COLUMNS: &str = "method\tseed\tcorrect\ttotal\taccuracy_pct\tseconds\tr\tparams\terror";

/// Output serialization for result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Tsv,
    Json,
}

impl OutputFormat {
    pub fn tag(self) -> &'static str {
        match self {
            OutputFormat::Tsv => "tsv",
            OutputFormat::Json => "json",
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(OutputFormat::Tsv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format `{other}` (expected tsv or json)"
            ))),
        }
    }
}

/// Run-level metadata carried in a result table header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub version: String,
    pub dataset: String,
    pub measure: String,
    pub seeds: Vec<u64>,
    pub threads: usize,
}

/// One method's outcome for one seed, or the aggregate over seeds
/// (`seed = None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub seed: Option<u64>,
    pub correct: usize,
    pub total: usize,
    pub seconds: f64,
    pub r_used: Option<usize>,
    pub params: BTreeMap<String, String>,
    pub error: Option<String>,
}

impl ResultRow {
    /// Test accuracy in percent; NaN when no predictions were made.
    pub fn accuracy_pct(&self) -> f64 {
        if self.total == 0 {
            f64::NAN
        } else {
            100.0 * self.correct as f64 / self.total as f64
        }
    }
}

/// A fully assembled experiment outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub meta: TableMeta,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(TSV_MAGIC);
        out.push('\n');
        out.push_str(&format!("#version {}\n", sanitize(&self.meta.version)));
        out.push_str(&format!("#dataset {}\n", sanitize(&self.meta.dataset)));
        out.push_str(&format!("#measure {}\n", sanitize(&self.meta.measure)));
        let seeds: Vec<String> = self.meta.seeds.iter().map(u64::to_string).collect();
        out.push_str(&format!("#seeds {}\n", seeds.join(",")));
        out.push_str(&format!("#threads {}\n", self.meta.threads));
        out.push_str(TSV_COLUMNS);
        out.push('\n');
        for row in &self.rows {
            let seed = row.seed.map_or_else(|| "mean".to_string(), |s| s.to_string());
            let r = row.r_used.map_or_else(|| "-".to_string(), |r| r.to_string());
            let params = if row.params.is_empty() {
                "-".to_string()
            } else {
                row.params
                    .iter()
                    .map(|(k, v)| format!("{}={}", sanitize(k), sanitize(v)))
                    .collect::<Vec<_>>()
                    .join(";")
            };
            let error = row.error.as_deref().map_or_else(|| "-".to_string(), sanitize);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                row.method,
                seed,
                row.correct,
                row.total,
                row.accuracy_pct(),
                row.seconds,
                r,
                params,
                error
            ));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<ResultTable> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut expect_header = |key: &str| -> Result<String> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| table_err(0, format!("missing `{key}` header")))?;
            let line = line.trim_end();
            let rest = line.strip_prefix(key).ok_or_else(|| {
                table_err(no + 1, format!("expected `{key} ...`, found `{line}`"))
            })?;
            Ok(rest.trim().to_string())
        };
        let magic = expect_header("#results-table")?;
        if magic != "v1" {
            return Err(table_err(1, format!("unsupported table version `{magic}`")));
        }
        let version = expect_header("#version")?;
        let dataset = expect_header("#dataset")?;
        let measure = expect_header("#measure")?;
        let seeds_text = expect_header("#seeds")?;
        let seeds = if seeds_text.is_empty() {
            Vec::new()
        } else {
            seeds_text
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|_| table_err(5, format!("invalid seed `{s}`")))
                })
                .collect::<Result<Vec<u64>>>()?
        };
        let threads: usize = expect_header("#threads")?
            .parse()
            .map_err(|_| table_err(6, "invalid thread count".to_string()))?;
        let (no, columns) = lines
            .next()
            .ok_or_else(|| table_err(0, "missing column header".to_string()))?;
        if columns.trim_end() != TSV_COLUMNS {
            return Err(table_err(no + 1, "unexpected column header".to_string()));
        }

        let mut rows = Vec::new();
        for (no, line) in lines {
            let fields: Vec<&str> = line.trim_end_matches('\n').split('\t').collect();
            if fields.len() != 9 {
                return Err(table_err(
                    no + 1,
                    format!("expected 9 tab-separated fields, found {}", fields.len()),
                ));
            }
            let method: Method = fields[0].parse()?;
            let seed = match fields[1] {
                "mean" => None,
                s => Some(
                    s.parse::<u64>()
                        .map_err(|_| table_err(no + 1, format!("invalid seed `{s}`")))?,
                ),
            };
            let correct: usize = fields[2]
                .parse()
                .map_err(|_| table_err(no + 1, format!("invalid count `{}`", fields[2])))?;
            let total: usize = fields[3]
                .parse()
                .map_err(|_| table_err(no + 1, format!("invalid count `{}`", fields[3])))?;
            // Field 4 is the derived accuracy; counts are authoritative.
            let seconds: f64 = fields[5]
                .parse()
                .map_err(|_| table_err(no + 1, format!("invalid seconds `{}`", fields[5])))?;
            let r_used = match fields[6] {
                "-" => None,
                s => Some(
                    s.parse::<usize>()
                        .map_err(|_| table_err(no + 1, format!("invalid r `{s}`")))?,
                ),
            };
            let mut params = BTreeMap::new();
            if fields[7] != "-" {
                for pair in fields[7].split(';') {
                    let (k, v) = pair.split_once('=').ok_or_else(|| {
                        table_err(no + 1, format!("malformed parameter `{pair}`"))
                    })?;
                    params.insert(k.to_string(), v.to_string());
                }
            }
            let error = match fields[8] {
                "-" => None,
                s => Some(s.to_string()),
            };
            rows.push(ResultRow { method, seed, correct, total, seconds, r_used, params, error });
        }
        Ok(ResultTable {
            meta: TableMeta { version, dataset, measure, seeds, threads },
            rows,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result tables always serialize")
    }

    pub fn from_json(text: &str) -> Result<ResultTable> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse { path: "<json>".into(), line: e.line(), msg: e.to_string() })
    }

    pub fn emit(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Tsv => self.to_tsv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn parse(text: &str, format: OutputFormat) -> Result<ResultTable> {
        match format {
            OutputFormat::Tsv => ResultTable::from_tsv(text),
            OutputFormat::Json => ResultTable::from_json(text),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.emit(format))
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read(path: &Path, format: OutputFormat) -> Result<ResultTable> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        ResultTable::parse(&text, format)
    }

    /// Equality up to wall-clock time and thread count: same dataset,
    /// measure, seeds, and per-row outcomes.
    pub fn same_results(&self, other: &ResultTable) -> bool {
        if self.meta.dataset != other.meta.dataset
            || self.meta.measure != other.meta.measure
            || self.meta.seeds != other.meta.seeds
            || self.rows.len() != other.rows.len()
        {
            return false;
        }
        self.rows.iter().zip(&other.rows).all(|(a, b)| {
            a.method == b.method
                && a.seed == b.seed
                && a.correct == b.correct
                && a.total == b.total
                && a.r_used == b.r_used
                && a.params == b.params
                && a.error == b.error
        })
    }
}

/// Tabs and newlines would break the TSV grid; flatten them to spaces when
/// emitting.
fn sanitize(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

fn table_err(line: usize, msg: String) -> Error {
    Error::Parse { path: "<results-table>".into(), line, msg }
}
