//! Append-only JSON Lines storage for run records.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> JsonlError + '_ {
    move |source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Appends one record as a single line and syncs it to disk.
pub fn append<T: Serialize>(path: &Path, record: &T) -> Result<(), JsonlError> {
    let mut line = serde_json::to_string(record)?;
    line.push('\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    file.write_all(line.as_bytes()).map_err(io_err(path))?;
    file.sync_data().map_err(io_err(path))?;
    Ok(())
}

/// Result of a tolerant read: the records that parsed plus the 1-based line
/// numbers that did not.
#[derive(Debug)]
pub struct Lines<T> {
    pub records: Vec<T>,
    pub corrupt_lines: Vec<usize>,
}

/// Reads every parseable record. Corrupt lines are skipped with a warning;
/// a missing file reads as empty.
pub fn read_tolerant<T: DeserializeOwned>(path: &Path) -> Result<Lines<T>, JsonlError> {
    let mut out = Lines {
        records: Vec::new(),
        corrupt_lines: Vec::new(),
    };
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(io_err(path)(e)),
    };
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(rec) => out.records.push(rec),
            Err(e) => {
                log::warn!("{}:{}: skipping corrupt record: {e}", path.display(), idx + 1);
                out.corrupt_lines.push(idx + 1);
            }
        }
    }
    Ok(out)
}
