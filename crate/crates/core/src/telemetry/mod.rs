//! A/B bookkeeping: variant assignment, the event log, metrics and replay.

mod log;
mod replay;
mod report;
mod variant;

use serde::{Deserialize, Serialize};

use crate::corpus::Provenance;
use crate::event::Category;
use crate::rules::RuleId;

pub use log::{read_log, TelemetryError, TelemetryLog};
pub use replay::{replay, QueryRecord, ReplayOutput};
pub use report::{
    report, report_from_str, rule_label, CategoryCounts, CategorySplit, Diagnostics, MetricsReport,
    VariantRates, RULE_LABELS,
};
pub use variant::{assign_variant, stable_hash, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRules {
    pub applied_rules: Vec<RuleId>,
    pub streamed_count: usize,
}

/// One search as seen by the experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTelemetry {
    pub session_id: String,
    /// Milliseconds since the epoch.
    pub timestamp: u64,
    pub variant: Variant,
    pub query: String,
    pub triggered: bool,
    pub category: Category,
    pub original_count: usize,
    pub candidate_rules: Vec<CandidateRules>,
}

impl SearchTelemetry {
    pub fn total_results(&self) -> usize {
        self.original_count + self.candidate_rules.iter().map(|c| c.streamed_count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickEvent {
    pub session_id: String,
    pub timestamp: u64,
    pub source: Provenance,
    pub category_at_search: Category,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TelemetryRecord {
    Search(SearchTelemetry),
    Click(ClickEvent),
}

impl TelemetryRecord {
    pub fn session_id(&self) -> &str {
        match self {
            TelemetryRecord::Search(s) => &s.session_id,
            TelemetryRecord::Click(c) => &c.session_id,
        }
    }

    /// Checks the record's internal consistency.
    pub fn validate(&self) -> Result<(), String> {
        if self.session_id().is_empty() {
            return Err("session_id must not be empty".into());
        }
        match self {
            TelemetryRecord::Search(s) => {
                let consistent = match s.category {
                    Category::NotTriggered => !s.triggered,
                    Category::NoResults => s.triggered && s.original_count == 0,
                    Category::SomeResults => s.triggered && s.original_count > 0,
                };
                if !consistent {
                    return Err(format!(
                        "category {} is inconsistent with triggered={} and original_count={}",
                        s.category.as_str(),
                        s.triggered,
                        s.original_count
                    ));
                }
                if !s.triggered && !s.candidate_rules.is_empty() {
                    return Err("untriggered search cannot list candidates".into());
                }
                if s.candidate_rules.iter().any(|c| c.applied_rules.is_empty()) {
                    return Err("candidate without rules".into());
                }
                Ok(())
            }
            TelemetryRecord::Click(c) => {
                c.source.validate()?;
                if !c.source.is_original() && c.category_at_search == Category::NotTriggered {
                    return Err("candidate click on an untriggered search".into());
                }
                Ok(())
            }
        }
    }

    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("records always serialize");
        line.push('\n');
        line
    }
}

impl From<SearchTelemetry> for TelemetryRecord {
    fn from(s: SearchTelemetry) -> Self {
        TelemetryRecord::Search(s)
    }
}

impl From<ClickEvent> for TelemetryRecord {
    fn from(c: ClickEvent) -> Self {
        TelemetryRecord::Click(c)
    }
}
