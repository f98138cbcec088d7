//! Wire events: one JSON object per line.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::MatchRecord;
use crate::rules::RuleId;

pub const ALERT_TITLE: &str = "Smart Search";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    NotTriggered,
    NoResults,
    SomeResults,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::NotTriggered => "not_triggered",
            Category::NoResults => "no_results",
            Category::SomeResults => "some_results",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub rank: usize,
    pub applied_rules: Vec<RuleId>,
    pub rendered: String,
    pub description: String,
    pub streamed_count: usize,
    pub limit_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationOutcome {
    pub original_count: usize,
    pub triggered: bool,
    pub category: Category,
    /// Only candidates that were actually evaluated.
    pub candidates: Vec<CandidateSummary>,
    pub total_streamed: usize,
}

/// One alternative shown in the alert.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub description: String,
    pub query: String,
    pub count: usize,
    pub limit_hit: bool,
    pub rules: Vec<RuleId>,
}

impl Proposal {
    /// "1 result", "3 results", or "500+ results" when truncated.
    pub fn count_label(&self) -> String {
        let plus = if self.limit_hit { "+" } else { "" };
        let noun = if self.count == 1 && !self.limit_hit {
            "result"
        } else {
            "results"
        };
        format!("{}{plus} {noun}", self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorCode {
    Parse,
    /// Malformed request parameters (HTTP only).
    Request,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum Event {
    Match(MatchRecord),
    Alert {
        title: String,
        proposals: Vec<Proposal>,
    },
    Progress {
        streamed: usize,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
    Done {
        outcome: EvaluationOutcome,
    },
}

impl Event {
    /// The event as a single newline-terminated JSON line.
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("events always serialize");
        line.push('\n');
        line
    }

    pub fn write_line<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.to_line().as_bytes())
    }

    pub fn from_line(line: &str) -> serde_json::Result<Event> {
        serde_json::from_str(line)
    }
}
