//! Line-oriented code search with automated alternative query evaluation.
//!
//! A query is first run as written. When it hits a known interpretation
//! pitfall (word order, quotes, regex metasyntax, language names) and leaves
//! room under the display limit, rewritten alternatives are generated, run
//! in priority order, and their results streamed after the original ones
//! together with a "Smart Search" alert describing each alternative.
//!
//! The main entry points:
//!
//! - [`query::parse`] and [`query::print`] for the query language,
//! - [`Corpus`] for ingest, snapshots and plain search,
//! - [`rules`] and [`generator`] for rewriting,
//! - [`evaluate`] for the full smart-search flow,
//! - [`telemetry`] for A/B bookkeeping and metrics,
//! - [`app`] for the command line and HTTP service.

pub mod app;
pub mod corpus;
mod evaluate;
pub mod event;
pub mod generator;
mod pattern;
pub mod query;
pub mod rules;
pub mod telemetry;

pub use corpus::{Corpus, Document, MatchRecord, Provenance};
pub use evaluate::{
    evaluate, evaluate_parallel, EvalConfig, EvalError, EvalMode, DEFAULT_DISPLAY_LIMIT,
};
pub use event::{CandidateSummary, Category, EvaluationOutcome, Event, Proposal};
pub use generator::{generate, CandidateQuery};
pub use pattern::{RegexError, RegexPattern};
pub use rules::RuleId;
