//! Command line and HTTP front ends.

pub mod cli;
pub mod http;

use std::net::SocketAddr;
use std::path::PathBuf;

use crate::corpus::{Corpus, IngestConfig};
use crate::evaluate::EvalConfig;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:7070";

/// Where the service gets its corpus from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusSource {
    Snapshot(PathBuf),
    /// Ingested at startup.
    Root(PathBuf),
}

impl CorpusSource {
    pub fn load(&self) -> anyhow::Result<Corpus> {
        use anyhow::Context;
        match self {
            CorpusSource::Snapshot(path) => Corpus::load(path)
                .with_context(|| format!("cannot load snapshot {}", path.display())),
            CorpusSource::Root(root) => {
                let (corpus, report) = Corpus::ingest(root, &IngestConfig::default())?;
                tracing::info!(%report, root = %root.display(), "ingested");
                Ok(corpus)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub source: CorpusSource,
    pub eval: EvalConfig,
    /// Without a log, telemetry is kept in memory for the process lifetime.
    pub telemetry_log: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(source: CorpusSource) -> Self {
        Self {
            listen: DEFAULT_LISTEN.parse().expect("valid default address"),
            source,
            eval: EvalConfig::default(),
            telemetry_log: None,
            static_dir: None,
        }
    }
}
