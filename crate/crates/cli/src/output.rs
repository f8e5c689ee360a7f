//! CSV datasets and the JSON run summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// One CSV cell. Floats use Rust's shortest round-trip formatting.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(x) => Cell::F(x),
            None => Cell::S("closed".into()),
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::F(v) => write!(f, "{v}"),
            Cell::I(v) => write!(f, "{v}"),
            Cell::S(v) => f.write_str(v),
        }
    }
}

/// An in-memory table written in one go.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, config_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# config_sha256={config_hash}");
        let _ = writeln!(s, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, dir: &Path, config_hash: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, self.render(config_hash))?;
        Ok(path)
    }
}

/// A named check in the run summary.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Hard checks decide the exit code; soft ones only warn.
    pub hard: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn hard(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= tolerance,
            hard: true,
            value,
            tolerance,
        }
    }

    pub fn soft(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            hard: false,
            ..Check::hard(name, value, tolerance)
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, hard: bool) -> Self {
        Check {
            name: name.into(),
            passed,
            hard,
            value: if passed { 0.0 } else { 1.0 },
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub elapsed_seconds: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub results: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_hash_header_and_shortest_floats() {
        let mut t = Table::new("x", &["b", "index", "edge"]);
        t.push(vec![0.1.into(), 3usize.into(), None.into()]);
        t.push(vec![1e-20.into(), 0usize.into(), Some(-2.5).into()]);
        assert_eq!(t.render("ab"), "# config_sha256=ab\nb,index,edge\n0.1,3,closed\n0.00000000000000000001,0,-2.5\n");
    }

    #[test]
    fn check_constructors() {
        assert!(Check::hard("a", 1.0, 2.0).passed);
        assert!(!Check::soft("a", 3.0, 2.0).passed);
        assert!(!Check::hard("a", f64::NAN, 2.0).passed);
    }
}
