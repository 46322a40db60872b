//! Plain-text grid format.
//!
//! ```text
//! RAINGRID 1 <width> <height> <cell_size_deg>
//! <width space-separated values>     (height lines)
//! ```
//!
//! Missing pixels are written as `NA`. Numbers use the shortest decimal
//! form that parses back to the same `f64`. Lines end in `\n`; the file is
//! ASCII. Any reader that produces a [`RainGrid`] can stand in for this one.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{GridMeta, RainGrid};

pub const MAGIC: &str = "RAINGRID";
pub const VERSION: u32 = 1;
pub const MISSING_TOKEN: &str = "NA";

/// Serializes a grid in canonical form.
pub fn format_grid(g: &RainGrid) -> String {
    let m = g.meta();
    let mut out = String::with_capacity(m.pixel_count() * 6 + 32);
    let _ = writeln!(out, "{MAGIC} {VERSION} {} {} {}", m.width, m.height, m.cell_size_deg);
    for r in 0..m.height {
        for c in 0..m.width {
            if c > 0 {
                out.push(' ');
            }
            match g.get(r, c) {
                Some(v) => {
                    let _ = write!(out, "{v}");
                }
                None => out.push_str(MISSING_TOKEN),
            }
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses the text format.
pub fn parse_grid(text: &str) -> Result<RainGrid> {
    if !text.is_ascii() {
        return Err(parse_err(1, "grid files must be ASCII"));
    }
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != MAGIC {
        return Err(parse_err(
            1,
            format!("expected `{MAGIC} {VERSION} <width> <height> <cell_size_deg>`"),
        ));
    }
    if fields[1] != VERSION.to_string() {
        return Err(parse_err(1, format!("unsupported format version {}", fields[1])));
    }
    let width: usize = fields[2].parse().map_err(|_| parse_err(1, "bad width"))?;
    let height: usize = fields[3].parse().map_err(|_| parse_err(1, "bad height"))?;
    let cell: f64 = fields[4].parse().map_err(|_| parse_err(1, "bad cell size"))?;
    let meta = GridMeta::new(width, height, cell).map_err(|e| parse_err(1, e.to_string()))?;

    let mut values = Array2::zeros(meta.shape());
    let mut valid = Array2::from_elem(meta.shape(), false);
    for r in 0..height {
        let lineno = r + 2;
        let line = lines
            .next()
            .ok_or_else(|| parse_err(lineno, format!("expected {height} rows, found {r}")))?;
        let mut count = 0;
        for (c, tok) in line.split_whitespace().enumerate() {
            if c >= width {
                return Err(parse_err(lineno, format!("more than {width} values")));
            }
            if tok != MISSING_TOKEN {
                values[(r, c)] = tok
                    .parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("bad value `{tok}` in column {}", c + 1)))?;
                valid[(r, c)] = true;
            }
            count += 1;
        }
        if count != width {
            return Err(parse_err(lineno, format!("expected {width} values, found {count}")));
        }
    }
    for (i, rest) in lines.enumerate() {
        if !rest.trim().is_empty() {
            return Err(parse_err(height + 2 + i, "trailing data after last row"));
        }
    }
    RainGrid::new(meta, values, valid)
}

pub fn read_grid(path: &Path) -> Result<RainGrid> {
    parse_grid(&fs::read_to_string(path)?)
}

/// Writes `bytes` through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_grid(path: &Path, g: &RainGrid) -> Result<()> {
    write_atomic(path, format_grid(g).as_bytes())
}
