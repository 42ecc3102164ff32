//! Report files. Everything is rendered in memory first and written with
//! write-temp-then-rename, so a failed run leaves no partial outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// A JSON report: the command, the library version, the resolved
/// configuration and the command's results.
#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a C,
    pub result: &'a R,
}

/// Files produced by one run, written together at the end.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> anyhow::Result<()> {
        self.add(name, to_json(value)?);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file under `dir`, creating it if needed.
    pub fn write_all(&self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        self.files
            .iter()
            .map(|(name, contents)| {
                let path = dir.join(name);
                write_atomic(&path, contents.as_bytes())?;
                Ok(path)
            })
            .collect()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).context("output path has no file name")?;
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))
}

/// CSV with a header row and one numeric row per entry.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (k, x) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

/// Column-major variant of [`csv`]; columns must have equal length.
pub fn csv_columns(header: &[&str], columns: &[&[f64]]) -> String {
    let len = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == len));
    csv(header, (0..len).map(|i| columns.iter().map(|c| c[i]).collect()))
}
