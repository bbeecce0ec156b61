//! Named experiment pipelines and their tabular output.
//!
//! Every pipeline is a pure function of its [`RunConfig`] and returns an
//! [`ExperimentResult`]: one or more record tables with a fixed column
//! schema per experiment id, plus provenance. [`ExperimentResult::write`]
//! stores each table as `<table>.csv` and a `<experiment_id>.json` sidecar
//! holding the flat config, seed, schema version and table layout.
//!
//! | experiment id      | tables                                                  |
//! |--------------------|---------------------------------------------------------|
//! | `deviation`        | `deviation`, `deviation_summary`                        |
//! | `gain_vs_distance` | `gain_vs_distance`, `gain_fraunhofer`                   |
//! | `interference_map` | `interference_map`, `interference_zoom`                 |
//! | `se_cdf`           | `se_samples`, `se_cdf`, `se_summary`                    |
//! | `se_vs_k`          | `se_vs_k`                                               |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::{FlatConfig, RunConfig};
use crate::error::{Error, Result};

pub mod deviation;
pub mod gain;
pub mod interference;
pub mod se;

pub use deviation::run_deviation_study;
pub use gain::{local_maximum, log_spaced, run_gain_vs_distance};
pub use interference::{run_interference_map, run_interference_maps, GridSpec};
pub use se::{run_se_cdf, run_se_vs_k};

/// Version of the column layouts documented on each pipeline.
pub const SCHEMA_VERSION: u32 = 1;

/// One typed CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(f) => Some(*f),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Deterministic text form: shortest round-trip digits, scientific
    /// notation outside `[1e-4, 1e15)`.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Float(f) => {
                if f.is_nan() {
                    "NaN".into()
                } else if *f == 0.0 || (1e-4..1e15).contains(&f.abs()) {
                    format!("{f}")
                } else {
                    format!("{f:e}")
                }
            }
        }
    }
}

/// A named table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl RecordTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width for table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column.
    pub fn column_f64(&self, name: &str) -> Vec<f64> {
        let i = self
            .column_index(name)
            .unwrap_or_else(|| panic!("table {} has no column {name}", self.name));
        self.rows
            .iter()
            .map(|r| r[i].as_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// CSV bytes of the table (header plus rows).
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_err = |source| Error::Csv {
            path: PathBuf::from(format!("{}.csv", self.name)),
            source,
        };
        w.write_record(&self.columns).map_err(to_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(to_err)?;
        }
        w.into_inner().map_err(|e| Error::Csv {
            path: PathBuf::from(format!("{}.csv", self.name)),
            source: e.into_error().into(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
struct TableLayout<'a> {
    name: &'a str,
    file: String,
    columns: &'a [String],
    rows: usize,
}

#[derive(Debug, Clone, Serialize)]
struct Provenance {
    seed: u64,
    code_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
struct Sidecar<'a> {
    experiment_id: &'a str,
    schema_version: u32,
    config: &'a FlatConfig,
    provenance: Provenance,
    tables: Vec<TableLayout<'a>>,
    summary: &'a BTreeMap<String, Value>,
}

/// Output of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment_id: String,
    pub schema_version: u32,
    pub config: FlatConfig,
    pub seed: u64,
    pub tables: Vec<RecordTable>,
    /// Free-form scalar facts (achieved array sizes, etc.).
    pub summary: BTreeMap<String, Value>,
}

impl ExperimentResult {
    pub fn new(experiment_id: &str, config: &RunConfig) -> Self {
        Self {
            experiment_id: experiment_id.to_string(),
            schema_version: SCHEMA_VERSION,
            config: config.to_flat(),
            seed: config.scenario.seed,
            tables: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&RecordTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn total_rows(&self) -> usize {
        self.tables.iter().map(RecordTable::len).sum()
    }

    /// Writes every table and the sidecar into `dir` (created if needed)
    /// and returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        if self.tables.iter().all(RecordTable::is_empty) {
            return Err(Error::InvalidArgument(format!(
                "experiment {} produced no records",
                self.experiment_id
            )));
        }
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        for table in &self.tables {
            let path = dir.join(format!("{}.csv", table.name));
            write_file(&path, &table.to_csv()?)?;
            written.push(path);
        }
        let sidecar = Sidecar {
            experiment_id: &self.experiment_id,
            schema_version: self.schema_version,
            config: &self.config,
            provenance: Provenance {
                seed: self.seed,
                code_version: env!("CARGO_PKG_VERSION"),
            },
            tables: self
                .tables
                .iter()
                .map(|t| TableLayout {
                    name: &t.name,
                    file: format!("{}.csv", t.name),
                    columns: &t.columns,
                    rows: t.len(),
                })
                .collect(),
            summary: &self.summary,
        };
        let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        let path = dir.join(format!("{}.json", self.experiment_id));
        write_file(&path, json.as_bytes())?;
        written.push(path);
        Ok(written)
    }

    /// Short human-readable description of the tables.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for t in &self.tables {
            let _ = write!(s, "{}={} ", t.name, t.len());
        }
        s.trim_end().to_string()
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
