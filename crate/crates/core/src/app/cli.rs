//! Command line front end. Exit codes follow grep: 0 match, 1 none, 2 error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};

use super::{CorpusSource, ServiceConfig, DEFAULT_LISTEN};
use crate::corpus::{Corpus, IngestConfig, MatchRecord, Provenance};
use crate::evaluate::{evaluate, EvalConfig, EvalMode, DEFAULT_DISPLAY_LIMIT};
use crate::event::{Event, Proposal, ALERT_TITLE};
use crate::generator::DEFAULT_MAX_CANDIDATES;
use crate::telemetry::{replay, report_from_str};

pub const EXIT_MATCH: i32 = 0;
pub const EXIT_NO_MATCH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "smartsearch", version, about = "Code search with smart query alternatives")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    /// Maximum number of matches shown
    #[arg(long, default_value_t = DEFAULT_DISPLAY_LIMIT)]
    pub limit: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
    pub max_candidates: usize,
    /// Disable smart search alternatives
    #[arg(long)]
    pub no_atqe: bool,
    /// Search alternatives concurrently
    #[arg(long)]
    pub parallel: bool,
}

impl EvalArgs {
    pub fn config(&self) -> EvalConfig {
        EvalConfig {
            display_limit: self.limit,
            max_candidates: self.max_candidates,
            atqe_enabled: !self.no_atqe,
            mode: if self.parallel {
                EvalMode::Parallel
            } else {
                EvalMode::Sequential
            },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Index a directory of repositories into a snapshot
    Index {
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skip files larger than this many bytes
        #[arg(long, default_value_t = IngestConfig::default().max_file_size)]
        max_file_size: u64,
    },
    /// Search a snapshot
    Search {
        snapshot: PathBuf,
        query: String,
        #[command(flatten)]
        eval: EvalArgs,
        /// Print wire-protocol events
        #[arg(long)]
        json: bool,
    },
    /// Replay a queries file and compute experiment metrics
    Replay {
        snapshot: PathBuf,
        queries: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Event log output (default: next to the report)
        #[arg(long)]
        log: Option<PathBuf>,
        /// Click records to merge into the log
        #[arg(long)]
        clicks: Option<PathBuf>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Compute metrics from an existing telemetry log
    Report { log: PathBuf },
    /// Run the HTTP service
    Serve {
        #[arg(long, conflicts_with = "root", required_unless_present = "root")]
        snapshot: Option<PathBuf>,
        /// Ingest this directory at startup instead of loading a snapshot
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_LISTEN)]
        listen: SocketAddr,
        #[arg(long)]
        telemetry_log: Option<PathBuf>,
        /// Directory with UI assets served at /
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[command(flatten)]
        eval: EvalArgs,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_MATCH };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", chain(&e));
            EXIT_ERROR
        }
    }
}

/// The error and its causes, skipping causes already spelled out by the
/// message above them.
fn chain(e: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !text.ends_with(&msg) {
            if !text.is_empty() {
                text.push_str(": ");
            }
            text.push_str(&msg);
        }
    }
    text
}

pub fn execute(command: Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Index {
            root,
            out: snapshot,
            max_file_size,
        } => {
            let config = IngestConfig {
                max_file_size,
                ..IngestConfig::default()
            };
            let (corpus, report) = Corpus::ingest(&root, &config)?;
            corpus
                .save(&snapshot)
                .with_context(|| format!("cannot write snapshot {}", snapshot.display()))?;
            writeln!(out, "{report}")?;
            Ok(EXIT_MATCH)
        }
        Command::Search {
            snapshot,
            query,
            eval,
            json,
        } => {
            let corpus = load(&snapshot)?;
            search(&corpus, &query, &eval.config(), json, out)
        }
        Command::Replay {
            snapshot,
            queries,
            report,
            log,
            clicks,
            eval,
        } => {
            let corpus = load(&snapshot)?;
            let queries_text = read(&queries)?;
            let clicks_text = clicks.as_deref().map(read).transpose()?;
            let output = replay(&corpus, &queries_text, &eval.config(), clicks_text.as_deref())?;
            let log = log.unwrap_or_else(|| report.with_extension("log.jsonl"));
            std::fs::write(&report, output.report.to_pretty_json())
                .with_context(|| format!("cannot write {}", report.display()))?;
            std::fs::write(&log, output.log())
                .with_context(|| format!("cannot write {}", log.display()))?;
            writeln!(
                out,
                "replayed {} searches ({} lines skipped), trigger rate {}",
                output.report.diagnostics.searches,
                output.skipped_lines,
                output.report.trigger_rate_by_search
            )?;
            Ok(EXIT_MATCH)
        }
        Command::Report { log } => {
            let report = report_from_str(&read(&log)?);
            out.write_all(report.to_pretty_json().as_bytes())?;
            Ok(EXIT_MATCH)
        }
        Command::Serve {
            snapshot,
            root,
            listen,
            telemetry_log,
            static_dir,
            eval,
        } => {
            let source = match (snapshot, root) {
                (Some(s), _) => CorpusSource::Snapshot(s),
                (None, Some(r)) => CorpusSource::Root(r),
                (None, None) => anyhow::bail!("either --snapshot or --root is required"),
            };
            let config = ServiceConfig {
                listen,
                eval: eval.config(),
                telemetry_log,
                static_dir,
                ..ServiceConfig::new(source)
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(super::http::serve(config))?;
            Ok(EXIT_MATCH)
        }
    }
}

fn load(snapshot: &Path) -> anyhow::Result<Corpus> {
    Corpus::load(snapshot).with_context(|| format!("cannot load snapshot {}", snapshot.display()))
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Runs one search, printing either wire events or the human layout.
pub fn search(
    corpus: &Corpus,
    query: &str,
    config: &EvalConfig,
    json: bool,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let mut io_result = Ok(());
    let mut human = Human::default();
    let result = evaluate(corpus, query, config, &mut |event| {
        if io_result.is_err() {
            return;
        }
        io_result = if json {
            event.write_line(&mut *out)
        } else {
            human.event(event, &mut *out)
        };
    });
    io_result?;
    match result {
        Ok(outcome) if outcome.total_streamed > 0 => Ok(EXIT_MATCH),
        Ok(_) => Ok(EXIT_NO_MATCH),
        // The error event is already on stdout in json mode.
        Err(e) if json => {
            tracing::debug!(error = %e, "search failed");
            Ok(EXIT_ERROR)
        }
        Err(e) => Err(e.into()),
    }
}

/// Human-readable rendering: original matches grouped by file as they
/// arrive, alternatives collected and shown in a block after the alert.
#[derive(Default)]
struct Human {
    last_file: Option<(String, String, usize)>,
    by_rank: BTreeMap<usize, Vec<MatchRecord>>,
}

impl Human {
    fn event(&mut self, event: Event, out: &mut dyn Write) -> std::io::Result<()> {
        match event {
            Event::Match(m) => match &m.source {
                Provenance::Original => {
                    print_match(&mut self.last_file, &m, "", out)?;
                }
                Provenance::Candidate { rank, .. } => {
                    self.by_rank.entry(*rank).or_default().push(m);
                }
            },
            Event::Alert { proposals, .. } => self.alert(&proposals, out)?,
            // Errors go to the diagnostic stream via the returned result.
            Event::Error { .. } | Event::Progress { .. } | Event::Done { .. } => {}
        }
        Ok(())
    }

    fn alert(&mut self, proposals: &[Proposal], out: &mut dyn Write) -> std::io::Result<()> {
        if self.last_file.is_some() {
            writeln!(out)?;
        }
        writeln!(out, "{ALERT_TITLE}")?;
        let mut ranks = std::mem::take(&mut self.by_rank).into_values();
        for p in proposals {
            writeln!(out, "  {}: {} ({})", p.description, p.query, p.count_label())?;
            let mut last = None;
            for m in ranks.next().unwrap_or_default() {
                print_match(&mut last, &m, "    ", out)?;
            }
        }
        Ok(())
    }
}

/// Prints a match under its file header; several spans on one line print
/// the line once.
fn print_match(
    last: &mut Option<(String, String, usize)>,
    m: &MatchRecord,
    indent: &str,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    let same_file = matches!(last, Some((r, p, _)) if *r == m.repo && *p == m.path);
    if same_file && last.as_ref().map(|l| l.2) == Some(m.line_number) {
        return Ok(());
    }
    if !same_file {
        writeln!(out, "{indent}{}/{}", m.repo, m.path)?;
    }
    *last = Some((m.repo.clone(), m.path.clone(), m.line_number));
    writeln!(out, "{indent}  {}: {}", m.line_number, m.line_text)
}
