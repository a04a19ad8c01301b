//! CSV and JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes a CSV with the given header; every row must match its width.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.into_iter().map(fmt17))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes pretty-printed JSON followed by a newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Output directory, created if missing.
pub fn prepare_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

/// Header of a thin-space table: `x,value` or `x,x2,value`.
pub fn thin_header(dim: usize) -> Vec<&'static str> {
    if dim == 1 {
        vec!["x", "value"]
    } else {
        vec!["x", "x2", "value"]
    }
}

/// Row `x[, x2], rest...` for a thin position.
pub fn thin_row(dim: usize, p: [f64; 2], rest: &[f64]) -> Vec<f64> {
    let mut row = vec![p[0]];
    if dim == 2 {
        row.push(p[1]);
    }
    row.extend_from_slice(rest);
    row
}
