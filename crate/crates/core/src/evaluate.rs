//! The smart-search flow.
//!
//! The original query streams first. Alternatives run only if at least one
//! rule applies and the original left room under the display limit; each
//! alternative gets whatever budget remains, matches already shown are
//! suppressed, and evaluation stops as soon as the budget is spent.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{MatchRecord, Provenance, SearchError, Searcher};
use crate::event::{
    CandidateSummary, Category, ErrorCode, EvaluationOutcome, Event, Proposal, ALERT_TITLE,
};
use crate::generator::{generate, CandidateQuery, DEFAULT_MAX_CANDIDATES};
use crate::query::{parse, ParseError};
use crate::rules::describe;

/// Number of results the user is shown at most.
pub const DEFAULT_DISPLAY_LIMIT: usize = 500;

/// Records a parallel worker may buffer ahead of the committer.
const WORKER_BUFFER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    #[default]
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub display_limit: usize,
    pub max_candidates: usize,
    pub atqe_enabled: bool,
    pub mode: EvalMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            display_limit: DEFAULT_DISPLAY_LIMIT,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            atqe_enabled: true,
            mode: EvalMode::Sequential,
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<SearchError> for EvalError {
    fn from(e: SearchError) -> Self {
        EvalError::Internal(e.to_string())
    }
}

/// Runs `query` against `searcher`, streaming events into `sink`.
///
/// Every evaluation ends with either a `done` or an `error` event; the
/// error is also returned.
pub fn evaluate(
    searcher: &dyn Searcher,
    query: &str,
    config: &EvalConfig,
    sink: &mut dyn FnMut(Event),
) -> Result<EvaluationOutcome, EvalError> {
    let result = run(searcher, query, config, sink);
    if let Err(e) = &result {
        let code = match e {
            EvalError::Parse(_) => ErrorCode::Parse,
            EvalError::Internal(_) => ErrorCode::Internal,
        };
        sink(Event::Error {
            code,
            message: e.to_string(),
        });
    }
    result
}

/// [`evaluate`] with candidates searched concurrently. The event stream is
/// identical to sequential mode.
pub fn evaluate_parallel(
    searcher: &dyn Searcher,
    query: &str,
    config: &EvalConfig,
    sink: &mut dyn FnMut(Event),
) -> Result<EvaluationOutcome, EvalError> {
    let config = EvalConfig {
        mode: EvalMode::Parallel,
        ..config.clone()
    };
    evaluate(searcher, query, &config, sink)
}

type Location = (String, String, usize, usize, usize);

fn location(r: &MatchRecord) -> Location {
    (r.repo.clone(), r.path.clone(), r.line_number, r.start, r.end)
}

/// Emission state shared by both modes.
struct Emitter<'s> {
    sink: &'s mut dyn FnMut(Event),
    seen: HashSet<Location>,
    total: usize,
}

impl Emitter<'_> {
    /// Streams non-duplicate records until `budget` are emitted, then checks
    /// whether one more existed.
    fn stream(
        &mut self,
        records: impl Iterator<Item = Result<MatchRecord, SearchError>>,
        budget: usize,
        source: &Provenance,
    ) -> Result<(usize, bool), SearchError> {
        let mut streamed = 0;
        for record in records {
            let mut record = record?;
            let loc = location(&record);
            if self.seen.contains(&loc) {
                continue;
            }
            if streamed == budget {
                return Ok((streamed, true));
            }
            self.seen.insert(loc);
            record.source = source.clone();
            (self.sink)(Event::Match(record));
            streamed += 1;
            self.total += 1;
        }
        Ok((streamed, false))
    }
}

fn run(
    searcher: &dyn Searcher,
    text: &str,
    config: &EvalConfig,
    sink: &mut dyn FnMut(Event),
) -> Result<EvaluationOutcome, EvalError> {
    let query = parse(text)?;
    let limit = config.display_limit;
    let mut emitter = Emitter {
        sink,
        seen: HashSet::new(),
        total: 0,
    };

    let original = searcher.matches(&query)?;
    let (original_count, _) =
        emitter.stream(original.map(Ok), limit, &Provenance::Original)?;

    let mut candidates = generate(&query, config.max_candidates).peekable();
    let triggered =
        config.atqe_enabled && original_count < limit && candidates.peek().is_some();

    let mut summaries = Vec::new();
    if triggered {
        match config.mode {
            EvalMode::Sequential => {
                for candidate in candidates {
                    let budget = limit - emitter.total;
                    if budget == 0 {
                        break;
                    }
                    let records = searcher.matches(&candidate.query)?.map(Ok);
                    summaries.push(run_candidate(&mut emitter, candidate, records, budget)?);
                }
            }
            EvalMode::Parallel => {
                let candidates: Vec<_> = candidates.collect();
                summaries = run_parallel(searcher, &mut emitter, candidates, limit)?;
            }
        }
    }

    let proposals: Vec<Proposal> = summaries
        .iter()
        .filter(|s| s.streamed_count > 0)
        .map(|s| Proposal {
            description: s.description.clone(),
            query: s.rendered.clone(),
            count: s.streamed_count,
            limit_hit: s.limit_hit,
            rules: s.applied_rules.clone(),
        })
        .collect();
    if !proposals.is_empty() {
        (emitter.sink)(Event::Alert {
            title: ALERT_TITLE.to_string(),
            proposals,
        });
    }

    let category = match (triggered, original_count) {
        (false, _) => Category::NotTriggered,
        (true, 0) => Category::NoResults,
        (true, _) => Category::SomeResults,
    };
    let outcome = EvaluationOutcome {
        original_count,
        triggered,
        category,
        candidates: summaries,
        total_streamed: emitter.total,
    };
    (emitter.sink)(Event::Done {
        outcome: outcome.clone(),
    });
    Ok(outcome)
}

fn run_candidate(
    emitter: &mut Emitter<'_>,
    candidate: CandidateQuery,
    records: impl Iterator<Item = Result<MatchRecord, SearchError>>,
    budget: usize,
) -> Result<CandidateSummary, SearchError> {
    let source = Provenance::Candidate {
        rank: candidate.rank,
        rules: candidate.applied_rules.clone(),
    };
    let (streamed_count, limit_hit) = emitter.stream(records, budget, &source)?;
    Ok(CandidateSummary {
        rank: candidate.rank,
        description: describe(&candidate.applied_rules),
        applied_rules: candidate.applied_rules,
        rendered: candidate.rendered,
        streamed_count,
        limit_hit,
    })
}

/// Searches all candidates on worker threads while committing their
/// records strictly in rank order.
fn run_parallel(
    searcher: &dyn Searcher,
    emitter: &mut Emitter<'_>,
    candidates: Vec<CandidateQuery>,
    limit: usize,
) -> Result<Vec<CandidateSummary>, SearchError> {
    let cancel = AtomicBool::new(false);
    thread::scope(|scope| {
        let mut receivers = Vec::with_capacity(candidates.len());
        for candidate in &candidates {
            let (tx, rx) = mpsc::sync_channel::<Result<MatchRecord, SearchError>>(WORKER_BUFFER);
            let query = candidate.query.clone();
            let cancel = &cancel;
            scope.spawn(move || {
                let records = match searcher.matches(&query) {
                    Ok(records) => records,
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        return;
                    }
                };
                for record in records {
                    if cancel.load(Ordering::Relaxed) || tx.send(Ok(record)).is_err() {
                        return;
                    }
                }
            });
            receivers.push(rx);
        }

        let mut summaries = Vec::new();
        let mut outcome = Ok(());
        for (candidate, rx) in candidates.into_iter().zip(receivers.drain(..)) {
            let budget = limit - emitter.total;
            if budget == 0 {
                break;
            }
            match run_candidate(emitter, candidate, rx.into_iter(), budget) {
                Ok(summary) => summaries.push(summary),
                Err(e) => {
                    outcome = Err(e);
                    break;
                }
            }
        }
        // Remaining receivers are dropped with the closure, which unblocks
        // any worker waiting on a full channel.
        cancel.store(true, Ordering::Relaxed);
        outcome.map(|()| summaries)
    })
}
