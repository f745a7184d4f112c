//! Result tables and their CSV / JSON serialisation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// One CSV cell. Floats use the shortest round-trip form, in exponent notation when tiny or huge.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // adding zero folds −0 into 0
            Cell::Float(x) => format!("{:?}", x + 0.0),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<u128> for Cell {
    fn from(x: u128) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::table::Cell::from($x)),*] };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the column schema");
        self.rows.push(row);
    }

    /// CSV text: a `#` provenance line, the header, then the rows.
    pub fn to_csv(&self, provenance: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        format!("# {provenance}\n{body}")
    }
}

/// Metadata written next to each CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub experiment: String,
    pub config_hash: String,
    pub code_version: String,
    pub workers: usize,
    pub memory_budget_bytes: u64,
    pub wall_time_seconds: f64,
    pub columns: Vec<&'static str>,
    pub row_count: usize,
    pub config: Value,
    pub summary: Value,
    pub warnings: Vec<String>,
    pub extra_files: Vec<String>,
}

pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn write_outputs(dir: &Path, table: &ResultTable, meta: &Metadata) -> std::io::Result<Written> {
    fs::create_dir_all(dir)?;
    let provenance = format!(
        "config_sha256={} experiment={} version={}",
        meta.config_hash, meta.experiment, meta.code_version
    );
    let csv = dir.join(format!("{}.csv", meta.experiment));
    fs::write(&csv, table.to_csv(&provenance))?;
    let json = dir.join(format!("{}.json", meta.experiment));
    let mut text = serde_json::to_string_pretty(meta).expect("metadata serialises");
    text.push('\n');
    fs::write(&json, text)?;
    Ok(Written { csv, json })
}
