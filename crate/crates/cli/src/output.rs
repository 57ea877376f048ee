//! Fixed-format CSV and JSON output.
//!
//! Every number is written with 17 significant digits in scientific
//! notation, lines end in LF, and the first line carries the manifest hash.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(manifest_hash: &str, header: &[&str]) -> Self {
        let mut text = format!("# manifest_sha256={manifest_hash}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width");
        let cells: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// Trailing `# key=value` line.
    pub fn footer(&mut self, key: &str, value: f64) {
        let _ = writeln!(self.text, "# {key}={}", format_number(value));
    }

    pub fn note(&mut self, key: &str, value: &str) {
        let _ = writeln!(self.text, "# {key}={value}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.text).with_context(|| format!("cannot write {}", path.display()))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
