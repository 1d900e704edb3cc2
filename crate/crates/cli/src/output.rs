use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

/// Writes `<command>-<seed>-<timestamp>.<ext>` files into one directory.
/// The timestamp appears in file names only, never in file contents.
#[derive(Debug, Clone)]
pub struct Sink {
    dir: PathBuf,
    stem: String,
}

impl Sink {
    pub fn new(dir: &Path, command: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Sink {
            dir: dir.to_path_buf(),
            stem: format!("{command}-{seed}-{stamp}"),
        })
    }

    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.stem))
    }

    pub fn write_text(&self, ext: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(ext);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_csv(&self, header: &str, rows: impl IntoIterator<Item = String>) -> Result<PathBuf> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        self.write_text("csv", &text)
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text("json", &text)
    }
}

/// CSV cell for an optional value; empty when absent.
pub fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
