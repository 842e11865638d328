//! Seeded Monte Carlo experiments, closed-form reproductions, the property
//! suite behind `divgeo verify`, and the CLI.

pub mod asset;
pub mod cli;
pub mod estimators;
pub mod instances;
pub mod sampler;
pub mod table2;
pub mod verify;

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use asset::{asset_experiment, AssetModel, AssetReport};
pub use estimators::{fit_log_slope, lln_experiment, variance_unbiasedness_experiment};
pub use sampler::Sampler;
pub use table2::table_reproduction;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            // `{}` prints the shortest string that parses back to the same f64.
            Cell::Num(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(format!("{v}"))),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
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

/// Tabular output of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub seed: u64,
    pub generator_kind: String,
}

impl ExperimentResult {
    pub fn new(name: &str, columns: &[&str], seed: u64, generator_kind: String) -> Self {
        ExperimentResult {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            seed,
            generator_kind,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column (text cells are skipped).
    pub fn column(&self, name: &str) -> Vec<f64> {
        match self.column_index(name) {
            Some(i) => self.rows.iter().filter_map(|r| r[i].as_f64()).collect(),
            None => Vec::new(),
        }
    }

    /// Text values of a column.
    pub fn text_column(&self, name: &str) -> Vec<String> {
        match self.column_index(name) {
            Some(i) => self.rows.iter().map(|r| r[i].render()).collect(),
            None => Vec::new(),
        }
    }

    /// CSV with a header row, `.` decimals and `\n` row terminators.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io_err = |e: csv::Error| Error::InvalidArgument {
            field: "out",
            reason: e.to_string(),
        };
        w.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument {
            field: "out",
            reason: e.to_string(),
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// An array of objects keyed by column name, in column order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}
