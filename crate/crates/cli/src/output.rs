//! CSV tables and the JSON run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // keep -0.0 and 0.0 byte-identical
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x),
        Cell::Text(s) => s.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Table { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Column by header name as floats; non-numeric cells become NaN.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.header.iter().position(|h| *h == name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|row| match &row[k] {
                Cell::Float(x) => *x,
                Cell::Int(i) => *i as f64,
                Cell::Text(_) => f64::NAN,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion { name: name.into(), passed, detail: detail.into() }
    }
}

/// Everything one experiment produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub tables: Vec<Table>,
    /// Derived quantities recorded in the manifest (coefficient tables etc.).
    pub derived: Value,
    pub assertions: Vec<Assertion>,
    /// Human-readable lines, numbers rounded to 6 significant digits.
    pub summary: Vec<String>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn manifest(cfg: &RunConfig, report: &Report) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "core_version": squeezelab_core::VERSION,
        "experiment": cfg.experiment.name(),
        "config": cfg.to_json(),
        "tolerances": cfg.to_json()["tolerances"].clone(),
        "derived": report.derived,
        "assertions": report.assertions.iter().map(|a| json!({
            "name": a.name, "passed": a.passed, "detail": a.detail,
        })).collect::<Vec<_>>(),
        "files": report.tables.iter().map(Table::file_name).collect::<Vec<_>>(),
    })
}

/// Writes every table and `<experiment>_manifest.json` into `dir`.
pub fn write_report(cfg: &RunConfig, report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |context: String| move |source| CliError::Io { context, source };
    fs::create_dir_all(dir).map_err(io(format!("creating {}", dir.display())))?;
    let mut written = Vec::new();
    for table in &report.tables {
        let path = dir.join(table.file_name());
        fs::write(&path, table.to_csv()).map_err(io(format!("writing {}", path.display())))?;
        written.push(path);
    }
    let path = dir.join(format!("{}_manifest.json", cfg.experiment.name()));
    let text = serde_json::to_string_pretty(&manifest(cfg, report)).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io(format!("writing {}", path.display())))?;
    written.push(path);
    Ok(written)
}

/// Six significant digits for human-facing lines.
pub fn short(x: f64) -> String {
    format!("{x:.5e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 1.0 - f64::EPSILON] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(-0.0), format_float(0.0));
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", vec!["n", "x", "status"]);
        t.push(vec![3usize.into(), 0.5.into(), "ok".into()]);
        assert_eq!(t.to_csv(), "n,x,status\n3,5.0000000000000000e-1,ok\n");
        assert_eq!(t.column("x"), vec![0.5]);
    }
}
