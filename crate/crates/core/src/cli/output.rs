//! Table sink: CSV with fixed float formatting, or JSON with the same
//! columns and row order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::Format;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Int(v) => json!(v),
        Cell::Float(v) if v.is_finite() => json!(v),
        Cell::Float(_) | Cell::Empty => Value::Null,
        Cell::Bool(v) => json!(v),
        Cell::Text(s) => json!(s),
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(
            row.len(),
            self.columns.len(),
            "row width in table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(json_value).collect()))
            .collect();
        let mut s =
            serde_json::to_string_pretty(&json!({ "columns": self.columns, "rows": rows }))?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes into one output directory, creating it on first use.
#[derive(Debug)]
pub struct Sink {
    dir: PathBuf,
    format: Format,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn table(&mut self, table: &Table) -> Result<PathBuf> {
        let (ext, body) = match self.format {
            Format::Csv => ("csv", table.to_csv()),
            Format::Json => ("json", table.to_json()?),
        };
        self.file(&format!("{}.{ext}", table.name), &body)
    }

    /// Raw file, whatever the table format.
    pub fn file(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
