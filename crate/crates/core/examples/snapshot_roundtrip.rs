//! Ingests a directory, writes a snapshot, and loads it back.
//!
//!     cargo run --example snapshot_roundtrip -- path/to/repos

use std::path::PathBuf;

use smartsearch::corpus::IngestConfig;
use smartsearch::Corpus;

fn main() -> anyhow::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini"));
    let (corpus, report) = Corpus::ingest(&root, &IngestConfig::default())?;
    println!("{report}");

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.idx");
    corpus.save(&path)?;
    let size = std::fs::metadata(&path)?.len();
    let back = Corpus::load(&path)?;
    println!(
        "{} documents, {} lines, {size} bytes on disk, identical after reload: {}",
        back.len(),
        back.line_count(),
        back == corpus
    );
    Ok(())
}
