//! In-memory corpus: ingest, trigram index, search and snapshots.

mod ingest;
mod language;
mod search;
mod snapshot;
mod trigram;

use serde::{Deserialize, Serialize};

use crate::rules::RuleId;

pub use ingest::{IngestConfig, IngestError, IngestReport};
pub use language::{detect_language, resolve_language, UNKNOWN_LANGUAGE};
pub use search::{search, Matches, SearchError, SearchStats, Searcher};
pub use snapshot::{SnapshotError, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use trigram::TrigramIndex;

pub type DocId = u32;

/// One source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub repo: String,
    /// Relative to the repository, `/`-separated.
    pub path: String,
    pub language: String,
    pub lines: Vec<String>,
}

impl Document {
    /// Builds a document from file contents, splitting lines and detecting
    /// the language from `path`.
    pub fn new(repo: impl Into<String>, path: impl Into<String>, content: &str) -> Self {
        let path = path.into();
        Self {
            repo: repo.into(),
            language: detect_language(&path).to_string(),
            lines: content.lines().map(str::to_string).collect(),
            path,
        }
    }
}

/// An immutable, searchable set of documents.
///
/// Documents are ordered by `(repo, path)`; a document's id is its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    trigrams: TrigramIndex,
}

impl Corpus {
    pub fn from_documents(mut documents: Vec<Document>) -> Self {
        documents.sort_by(|a, b| (&a.repo, &a.path).cmp(&(&b.repo, &b.path)));
        let trigrams = TrigramIndex::build(&documents);
        Self {
            documents,
            trigrams,
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, id: DocId) -> &Document {
        &self.documents[id as usize]
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn trigrams(&self) -> &TrigramIndex {
        &self.trigrams
    }

    pub fn line_count(&self) -> usize {
        self.documents.iter().map(|d| d.lines.len()).sum()
    }
}

/// Where a match came from: the user's query or one of its alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Candidate { rank: usize, rules: Vec<RuleId> },
}

impl Provenance {
    pub fn is_original(&self) -> bool {
        matches!(self, Provenance::Original)
    }

    /// Checks the candidate invariants: rank at least 1 and a non-empty
    /// rule list.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Provenance::Original => Ok(()),
            Provenance::Candidate { rank: 0, .. } => Err("candidate rank must be >= 1".into()),
            Provenance::Candidate { rules, .. } if rules.is_empty() => {
                Err("candidate provenance requires at least one rule".into())
            }
            Provenance::Candidate { .. } => Ok(()),
        }
    }
}

/// A single hit. `start..end` is a non-empty byte range of `line_text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub repo: String,
    pub path: String,
    #[serde(rename = "line")]
    pub line_number: usize,
    pub start: usize,
    pub end: usize,
    #[serde(rename = "text")]
    pub line_text: String,
    pub source: Provenance,
}

impl MatchRecord {
    /// Identity used for duplicate suppression across queries.
    pub fn location(&self) -> (&str, &str, usize, usize, usize) {
        (&self.repo, &self.path, self.line_number, self.start, self.end)
    }
}
