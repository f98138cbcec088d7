use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{assign_variant, read_log, TelemetryRecord, Variant};
use crate::corpus::Provenance;
use crate::event::Category;
use crate::rules::RuleId;

/// Breakdown labels, in report order.
pub const RULE_LABELS: [&str; 6] = ["language", "regex", "unquote", "and", "composite", "other"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CategorySplit {
    pub no_results: f64,
    pub some_results: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub no_results: usize,
    pub some_results: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VariantRates {
    pub control: f64,
    pub atqe: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub malformed_lines: usize,
    pub searches: usize,
    pub clicks: usize,
    pub sessions: usize,
    pub original_clicks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub trigger_rate_by_search: f64,
    pub trigger_rate_by_session: f64,
    pub category_split: CategorySplit,
    pub rule_click_breakdown: BTreeMap<String, CategoryCounts>,
    pub clicked_any_by_session: VariantRates,
    pub searches_with_results_rate: VariantRates,
    pub diagnostics: Diagnostics,
}

impl MetricsReport {
    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Label used in the rule breakdown for a clicked candidate.
pub fn rule_label(rules: &[RuleId]) -> &'static str {
    match rules {
        [one] => one.as_str(),
        [] => "other",
        _ => "composite",
    }
}

/// Report over a log's text; bad lines are counted in diagnostics.
pub fn report_from_str(log: &str) -> MetricsReport {
    let (records, malformed) = read_log(log);
    let mut r = report(&records);
    r.diagnostics.malformed_lines = malformed;
    r
}

pub fn report(records: &[TelemetryRecord]) -> MetricsReport {
    let mut breakdown: BTreeMap<String, CategoryCounts> = RULE_LABELS
        .iter()
        .map(|l| (l.to_string(), CategoryCounts::default()))
        .collect();

    let mut searches = 0;
    let mut triggered = 0;
    let mut no_results = 0;
    let mut session_variant: BTreeMap<&str, Variant> = BTreeMap::new();
    let mut search_sessions: BTreeSet<&str> = BTreeSet::new();
    let mut triggered_sessions: BTreeSet<&str> = BTreeSet::new();
    let mut clicked_sessions: BTreeSet<&str> = BTreeSet::new();
    // (searches, searches with results) per variant
    let mut with_results: BTreeMap<Variant, (usize, usize)> = BTreeMap::new();
    let mut clicks = 0;
    let mut original_clicks = 0;

    for record in records {
        match record {
            TelemetryRecord::Search(s) => {
                searches += 1;
                session_variant.entry(&s.session_id).or_insert(s.variant);
                search_sessions.insert(&s.session_id);
                if s.triggered {
                    triggered += 1;
                    triggered_sessions.insert(&s.session_id);
                    if s.category == Category::NoResults {
                        no_results += 1;
                    }
                }
                let slot = with_results.entry(s.variant).or_default();
                slot.0 += 1;
                if s.total_results() > 0 {
                    slot.1 += 1;
                }
            }
            TelemetryRecord::Click(c) => {
                clicks += 1;
                clicked_sessions.insert(&c.session_id);
                match &c.source {
                    Provenance::Original => original_clicks += 1,
                    Provenance::Candidate { rules, .. } => {
                        let counts = breakdown.get_mut(rule_label(rules)).expect("label is prefilled");
                        match c.category_at_search {
                            Category::NoResults => counts.no_results += 1,
                            Category::SomeResults => counts.some_results += 1,
                            Category::NotTriggered => {}
                        }
                    }
                }
            }
        }
    }

    let mut sessions_by_variant: BTreeMap<Variant, (usize, usize)> = BTreeMap::new();
    let all_sessions: BTreeSet<&str> = search_sessions.iter().chain(&clicked_sessions).copied().collect();
    for s in &all_sessions {
        let v = session_variant.get(s).copied().unwrap_or_else(|| assign_variant(s));
        let slot = sessions_by_variant.entry(v).or_default();
        slot.0 += 1;
        if clicked_sessions.contains(s) {
            slot.1 += 1;
        }
    }
    let rates = |m: &BTreeMap<Variant, (usize, usize)>| {
        let get = |v| m.get(&v).map_or(0.0, |&(den, num)| ratio(num, den));
        VariantRates {
            control: get(Variant::Control),
            atqe: get(Variant::Atqe),
        }
    };

    MetricsReport {
        trigger_rate_by_search: ratio(triggered, searches),
        trigger_rate_by_session: ratio(triggered_sessions.len(), search_sessions.len()),
        category_split: if triggered == 0 {
            CategorySplit::default()
        } else {
            CategorySplit {
                no_results: ratio(no_results, triggered),
                some_results: ratio(triggered - no_results, triggered),
            }
        },
        rule_click_breakdown: breakdown,
        clicked_any_by_session: rates(&sessions_by_variant),
        searches_with_results_rate: rates(&with_results),
        diagnostics: Diagnostics {
            malformed_lines: 0,
            searches,
            clicks,
            sessions: all_sessions.len(),
            original_clicks,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{CandidateRules, ClickEvent, SearchTelemetry};

    fn search(session: &str, category: Category, original: usize) -> TelemetryRecord {
        let triggered = category != Category::NotTriggered;
        TelemetryRecord::Search(SearchTelemetry {
            session_id: session.into(),
            timestamp: 0,
            variant: Variant::Atqe,
            query: "q".into(),
            triggered,
            category,
            original_count: original,
            candidate_rules: if triggered {
                vec![CandidateRules {
                    applied_rules: vec![RuleId::And],
                    streamed_count: 1,
                }]
            } else {
                vec![]
            },
        })
    }

    #[test]
    fn ten_searches_three_triggered() {
        let mut log: Vec<_> = (0..7).map(|i| search(&format!("s{i}"), Category::NotTriggered, 600)).collect();
        log.extend((0..3).map(|i| search(&format!("s{i}"), Category::NoResults, 0)));
        let r = report(&log);
        assert_eq!(r.trigger_rate_by_search, 0.3);
        assert_eq!(r.category_split, CategorySplit { no_results: 1.0, some_results: 0.0 });
    }

    #[test]
    fn even_category_split() {
        let mut log: Vec<_> = (0..5).map(|_| search("a", Category::NoResults, 0)).collect();
        log.extend((0..5).map(|_| search("a", Category::SomeResults, 2)));
        let r = report(&log);
        assert_eq!(r.category_split, CategorySplit { no_results: 0.5, some_results: 0.5 });
        assert_eq!(r.trigger_rate_by_session, 1.0);
    }

    #[test]
    fn empty_log() {
        let r = report_from_str("");
        assert_eq!(r.trigger_rate_by_search, 0.0);
        assert_eq!(r.diagnostics, Diagnostics::default());
        assert_eq!(r.rule_click_breakdown.len(), 6);
    }

    #[test]
    fn click_labels() {
        let click = |rules: Vec<RuleId>| {
            TelemetryRecord::Click(ClickEvent {
                session_id: "c".into(),
                timestamp: 0,
                source: Provenance::Candidate { rank: 1, rules },
                category_at_search: Category::SomeResults,
            })
        };
        let r = report(&[
            click(vec![RuleId::Regex]),
            click(vec![RuleId::Language, RuleId::And]),
            click(vec![RuleId::Language, RuleId::Regex, RuleId::And]),
        ]);
        assert_eq!(r.rule_click_breakdown["regex"].some_results, 1);
        assert_eq!(r.rule_click_breakdown["composite"].some_results, 2);
        assert_eq!(r.rule_click_breakdown["and"], CategoryCounts::default());
    }
}
