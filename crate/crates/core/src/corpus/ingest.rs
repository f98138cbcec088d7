use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use thiserror::Error;
use walkdir::WalkDir;

use super::{Corpus, Document};

/// Bytes inspected for a NUL when deciding whether a file is binary.
const BINARY_PROBE: usize = 8 * 1024;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read ingest root {path}: {source}")]
    Root {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid ignore glob {glob:?}: {source}")]
    Glob {
        glob: String,
        #[source]
        source: globset::Error,
    },
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub max_file_size: u64,
    /// Globs matched against each path component; a match prunes the entry.
    pub ignore: Vec<String>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            max_file_size: 1 << 20,
            ignore: [
                ".git",
                ".hg",
                ".svn",
                "target",
                "node_modules",
                "build",
                "dist",
                "out",
                "__pycache__",
                "*.pyc",
                "*.o",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub files_indexed: usize,
    pub skipped_oversize: usize,
    pub skipped_binary: usize,
    /// Unreadable files and files that are not valid UTF-8.
    pub skipped_unreadable: usize,
}

impl IngestReport {
    pub fn skipped(&self) -> usize {
        self.skipped_oversize + self.skipped_binary + self.skipped_unreadable
    }
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} files indexed, {} skipped ({} oversize, {} binary, {} unreadable)",
            self.files_indexed,
            self.skipped(),
            self.skipped_oversize,
            self.skipped_binary,
            self.skipped_unreadable
        )
    }
}

fn ignore_set(globs: &[String]) -> Result<GlobSet, IngestError> {
    let mut builder = GlobSetBuilder::new();
    for glob in globs {
        builder.add(Glob::new(glob).map_err(|source| IngestError::Glob {
            glob: glob.clone(),
            source,
        })?);
    }
    builder.build().map_err(|source| IngestError::Glob {
        glob: globs.join(","),
        source,
    })
}

impl Corpus {
    /// Reads every text file under `root`.
    ///
    /// Each top-level subdirectory is a repository; files directly under
    /// `root` belong to a repository named after `root` itself.
    pub fn ingest(root: &Path, config: &IngestConfig) -> Result<(Corpus, IngestReport), IngestError> {
        let root_err = |source| IngestError::Root {
            path: root.to_path_buf(),
            source,
        };
        let meta = fs::metadata(root).map_err(root_err)?;
        if !meta.is_dir() {
            return Err(root_err(std::io::Error::new(
                std::io::ErrorKind::NotADirectory,
                "not a directory",
            )));
        }
        fs::read_dir(root).map_err(root_err)?;

        let ignore = ignore_set(&config.ignore)?;
        let root_name = root
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "root".to_string());

        let mut report = IngestReport::default();
        let mut documents = Vec::new();
        let walker = WalkDir::new(root)
            .sort_by_file_name()
            .into_iter()
            .filter_entry(|e| e.depth() == 0 || !ignore.is_match(e.file_name()));
        for entry in walker {
            let entry = match entry {
                Ok(e) => e,
                Err(_) => {
                    report.skipped_unreadable += 1;
                    continue;
                }
            };
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
            let parts: Vec<String> = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            let (repo, path) = if parts.len() == 1 {
                (root_name.clone(), parts[0].clone())
            } else {
                (parts[0].clone(), parts[1..].join("/"))
            };

            match read_text(entry.path(), config.max_file_size) {
                FileContent::Text(content) => {
                    documents.push(Document::new(repo, path, &content));
                    report.files_indexed += 1;
                }
                FileContent::Oversize => report.skipped_oversize += 1,
                FileContent::Binary => report.skipped_binary += 1,
                FileContent::Unreadable => report.skipped_unreadable += 1,
            }
        }
        Ok((Corpus::from_documents(documents), report))
    }
}

enum FileContent {
    Text(String),
    Oversize,
    Binary,
    Unreadable,
}

fn read_text(path: &Path, max_size: u64) -> FileContent {
    let Ok(meta) = fs::metadata(path) else {
        return FileContent::Unreadable;
    };
    if meta.len() > max_size {
        return FileContent::Oversize;
    }
    let mut bytes = Vec::with_capacity(meta.len() as usize);
    let Ok(mut file) = fs::File::open(path) else {
        return FileContent::Unreadable;
    };
    if file.read_to_end(&mut bytes).is_err() {
        return FileContent::Unreadable;
    }
    if bytes.len() as u64 > max_size {
        return FileContent::Oversize;
    }
    if bytes[..bytes.len().min(BINARY_PROBE)].contains(&0) {
        return FileContent::Binary;
    }
    match String::from_utf8(bytes) {
        Ok(s) => FileContent::Text(s),
        Err(_) => FileContent::Unreadable,
    }
}
