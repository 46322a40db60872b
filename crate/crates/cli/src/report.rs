//! Tab-separated report tables.

use std::fmt::Display;
use std::path::Path;

use anyhow::{Context, Result};

pub const MISSING: &str = "NA";

/// A TSV table with a header row, built in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Table {
    columns: usize,
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join("\t");
        text.push('\n');
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width differs from header");
        self.text.push_str(&fields.join("\t"));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        gapfuse::io::write_atomic(path, self.text.as_bytes())
            .with_context(|| format!("writing {}", path.display()))
    }
}

pub fn num(v: impl Display) -> String {
    v.to_string()
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |x| x.to_string())
}
