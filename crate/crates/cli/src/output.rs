//! Machine-readable tables and atomic file writes.
//!
//! Every table carries the run metadata: `# key: value` lines ahead of the
//! CSV header, or a `metadata` object in JSON. Numbers are written from the
//! same strings the human report prints, so both agree digit for digit.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::value::RawValue;
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// Ordered `key: value` pairs describing the run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    pub fn with(&self, key: &str, value: impl Into<String>) -> Metadata {
        let mut m = self.clone();
        m.0.push((key.to_string(), value.into()));
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// A numeric literal, written verbatim.
    Num(String),
    Text(String),
}

impl Cell {
    pub fn num(v: impl ToString) -> Cell {
        Cell::Num(v.to_string())
    }

    fn json(&self) -> Box<RawValue> {
        let literal = match self {
            Cell::Num(s) if serde_json::from_str::<serde_json::Number>(s).is_ok() => s.clone(),
            Cell::Num(s) | Cell::Text(s) => Value::String(s.clone()).to_string(),
        };
        RawValue::from_string(literal).expect("cell is a JSON literal")
    }

    fn text(&self) -> &str {
        match self {
            Cell::Num(s) | Cell::Text(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, metadata: &Metadata) -> String {
        match format {
            Format::Csv => self.csv(metadata),
            Format::Json => self.json(metadata),
        }
    }

    fn csv(&self, metadata: &Metadata) -> String {
        let mut out = String::new();
        for (k, v) in &metadata.0 {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<&str> = row.iter().map(Cell::text).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn json(&self, metadata: &Metadata) -> String {
        let meta: Map<String, Value> = metadata
            .0
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let rows: Vec<JsonRow> = self
            .rows
            .iter()
            .map(|row| JsonRow(self.columns.iter().copied().zip(row.iter().map(Cell::json)).collect()))
            .collect();
        let doc = JsonTable { metadata: meta, rows };
        let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
        s.push('\n');
        s
    }
}

/// One row as an ordered object of verbatim literals.
struct JsonRow(Vec<(&'static str, Box<RawValue>)>);

impl Serialize for JsonRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

struct JsonTable {
    metadata: Map<String, Value>,
    rows: Vec<JsonRow>,
}

impl Serialize for JsonTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("metadata", &self.metadata)?;
        map.serialize_entry("rows", &self.rows)?;
        map.end()
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), WriteError> {
    let err = |source| WriteError {
        path: path.to_path_buf(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}
