//! Comma-separated tables with `#` header comments, and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Params;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Self::Int(v) => write!(out, "{v}").unwrap(),
            // 17 significant digits round-trip every f64.
            // Adding 0.0 turns -0.0 into 0.0.
            Self::Float(v) => write!(out, "{:.16e}", v + 0.0).unwrap(),
            Self::Text(v) => out.push_str(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    /// One line saying what is tabulated.
    pub quantity: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: &str, quantity: &str, columns: &[&str]) -> Self {
        Self {
            file_name: file_name.to_string(),
            quantity: quantity.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header in {}", self.file_name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float values of a column; panics on text cells.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let k = self.column(name).unwrap_or_else(|| panic!("no column {name} in {}", self.file_name));
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Float(v) => *v,
                Cell::Int(v) => *v as f64,
                Cell::Text(t) => panic!("text cell {t:?} in numeric column {name}"),
            })
            .collect()
    }

    pub fn render(&self, scenario: &str, seed: u64, params: &Params) -> String {
        let mut out = String::new();
        writeln!(out, "# scenario: {scenario}").unwrap();
        writeln!(out, "# quantity: {}", self.quantity).unwrap();
        writeln!(out, "# seed: {seed}").unwrap();
        for (name, value) in params.iter() {
            writeln!(out, "# param {name} = {value}").unwrap();
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub version: String,
    pub seed: u64,
    pub status: String,
    pub parameters: Params,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    /// Recomputes every digest from the files in `dir`.
    pub fn verify(&self, dir: &Path) -> Result<(), CliError> {
        for file in &self.files {
            let bytes = std::fs::read(dir.join(&file.name))?;
            if sha256_hex(&bytes) != file.sha256 {
                return Err(CliError::Config(format!("digest mismatch for {}", file.name)));
            }
        }
        Ok(())
    }
}
