use serde::{Deserialize, Serialize};

use super::{assign_variant, report, CandidateRules, MetricsReport, SearchTelemetry, TelemetryRecord, Variant};
use crate::corpus::Searcher;
use crate::evaluate::{evaluate, EvalConfig, EvalError};
use crate::event::{Category, EvaluationOutcome};

/// One line of a queries file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub session_id: String,
    pub query: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutput {
    pub records: Vec<TelemetryRecord>,
    pub report: MetricsReport,
    /// Query and click lines that could not be used.
    pub skipped_lines: usize,
}

impl ReplayOutput {
    /// The event log as it would be written to disk.
    pub fn log(&self) -> String {
        self.records.iter().map(TelemetryRecord::to_line).collect()
    }
}

impl SearchTelemetry {
    /// Telemetry for a finished evaluation; `None` stands for a query that
    /// failed to parse.
    pub fn from_outcome(
        session_id: &str,
        timestamp: u64,
        variant: Variant,
        query: &str,
        outcome: Option<&EvaluationOutcome>,
    ) -> Self {
        let (triggered, category, original_count, candidate_rules) = match outcome {
            Some(o) => (
                o.triggered,
                o.category,
                o.original_count,
                o.candidates
                    .iter()
                    .map(|c| CandidateRules {
                        applied_rules: c.applied_rules.clone(),
                        streamed_count: c.streamed_count,
                    })
                    .collect(),
            ),
            None => (false, Category::NotTriggered, 0, Vec::new()),
        };
        Self {
            session_id: session_id.to_string(),
            timestamp,
            variant,
            query: query.to_string(),
            triggered,
            category,
            original_count,
            candidate_rules,
        }
    }
}

/// Replays a queries file against `searcher`.
///
/// Each query runs with smart search enabled only for sessions in the
/// treatment variant (and only if `config` enables it at all). Timestamps are
/// the 1-based line numbers so that the log is reproducible. Click records,
/// if given, are appended after the searches.
pub fn replay(
    searcher: &dyn Searcher,
    queries: &str,
    config: &EvalConfig,
    clicks: Option<&str>,
) -> Result<ReplayOutput, EvalError> {
    let mut records = Vec::new();
    let mut skipped_lines = 0;
    for (i, line) in queries.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Ok(q) = serde_json::from_str::<QueryRecord>(line) else {
            skipped_lines += 1;
            continue;
        };
        if q.session_id.is_empty() {
            skipped_lines += 1;
            continue;
        }
        let variant = assign_variant(&q.session_id);
        let config = EvalConfig {
            atqe_enabled: config.atqe_enabled && variant == Variant::Atqe,
            ..config.clone()
        };
        let outcome = match evaluate(searcher, &q.query, &config, &mut |_| {}) {
            Ok(o) => Some(o),
            Err(EvalError::Parse(_)) => None,
            Err(e) => return Err(e),
        };
        let t = SearchTelemetry::from_outcome(&q.session_id, i as u64 + 1, variant, &q.query, outcome.as_ref());
        records.push(TelemetryRecord::Search(t));
    }
    for line in clicks.unwrap_or("").lines() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TelemetryRecord>(line) {
            Ok(r @ TelemetryRecord::Click(_)) if r.validate().is_ok() => records.push(r),
            _ => skipped_lines += 1,
        }
    }
    let report = report(&records);
    Ok(ReplayOutput {
        records,
        report,
        skipped_lines,
    })
}
