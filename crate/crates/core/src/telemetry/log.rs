use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::TelemetryRecord;

#[derive(Debug, thiserror::Error)]
pub enum TelemetryError {
    #[error("telemetry log {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid telemetry record: {0}")]
    Invalid(String),
}

/// Append-only JSON-lines log, safe to share between threads.
///
/// Each record goes out in a single write while the lock is held, so lines
/// from concurrent writers never interleave.
#[derive(Debug)]
pub struct TelemetryLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl TelemetryLog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, TelemetryError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|source| TelemetryError::Io {
                path: path.clone(),
                source,
            })?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &TelemetryRecord) -> Result<(), TelemetryError> {
        record.validate().map_err(TelemetryError::Invalid)?;
        let line = record.to_line();
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|source| TelemetryError::Io {
                path: self.path.clone(),
                source,
            })
    }
}

/// Reads a log, returning parsed records and the number of lines that were
/// malformed or failed validation. Blank lines are ignored.
pub fn read_log(text: &str) -> (Vec<TelemetryRecord>, usize) {
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match serde_json::from_str::<TelemetryRecord>(line) {
            Ok(r) if r.validate().is_ok() => records.push(r),
            _ => malformed += 1,
        }
    }
    (records, malformed)
}
