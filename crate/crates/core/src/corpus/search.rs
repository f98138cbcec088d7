use std::collections::VecDeque;

use thiserror::Error;

use super::trigram::{intersect, union};
use super::{resolve_language, Corpus, DocId, Document, MatchRecord, Provenance};
use crate::pattern::{self, RegexError, RegexPattern, Re, Required};
use crate::query::{AtomKind, Filter, FilterField, Node, PatternAtom, Query};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("cannot compile pattern: {0}")]
    Pattern(#[from] RegexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub emitted_count: usize,
    /// At least one further match existed beyond the limit.
    pub limit_hit: bool,
}

/// Anything that can stream the matches of a query.
///
/// [`Corpus`] is the real implementation; the trait exists so that callers
/// can wrap it (for instance to count or delay searches).
pub trait Searcher: Sync {
    fn matches<'a>(
        &'a self,
        query: &Query,
    ) -> Result<Box<dyn Iterator<Item = MatchRecord> + Send + 'a>, SearchError>;
}

impl Searcher for Corpus {
    fn matches<'a>(
        &'a self,
        query: &Query,
    ) -> Result<Box<dyn Iterator<Item = MatchRecord> + Send + 'a>, SearchError> {
        Ok(Box::new(Matches::new(self, query)?))
    }
}

/// Streams up to `limit` matches of `query` into `sink`.
pub fn search(
    corpus: &Corpus,
    query: &Query,
    limit: usize,
    sink: &mut dyn FnMut(MatchRecord),
) -> Result<SearchStats, SearchError> {
    let mut matches = Matches::new(corpus, query)?;
    let mut stats = SearchStats::default();
    while stats.emitted_count < limit {
        match matches.next() {
            Some(record) => {
                sink(record);
                stats.emitted_count += 1;
            }
            None => return Ok(stats),
        }
    }
    stats.limit_hit = matches.next().is_some();
    Ok(stats)
}

impl Corpus {
    pub fn search(
        &self,
        query: &Query,
        limit: usize,
        sink: &mut dyn FnMut(MatchRecord),
    ) -> Result<SearchStats, SearchError> {
        search(self, query, limit, sink)
    }

    /// Documents that may contain matches for the pattern leaves of `query`.
    /// Always a superset of the documents that actually match.
    pub fn prefilter_candidates(&self, query: &Query) -> Vec<DocId> {
        match &query.root {
            None => Vec::new(),
            Some(root) => match Plan::compile(root) {
                Ok(plan) => plan.candidates(self).into_vec(self.len()),
                Err(_) => (0..self.len() as DocId).collect(),
            },
        }
    }
}

#[derive(Debug, Clone)]
enum DocSet {
    All,
    Ids(Vec<DocId>),
}

impl DocSet {
    fn and(self, other: DocSet) -> DocSet {
        match (self, other) {
            (DocSet::All, x) | (x, DocSet::All) => x,
            (DocSet::Ids(a), DocSet::Ids(b)) => DocSet::Ids(intersect(&a, &b)),
        }
    }

    fn or(self, other: DocSet) -> DocSet {
        match (self, other) {
            (DocSet::All, _) | (_, DocSet::All) => DocSet::All,
            (DocSet::Ids(a), DocSet::Ids(b)) => DocSet::Ids(union(&a, &b)),
        }
    }

    fn into_vec(self, len: usize) -> Vec<DocId> {
        match self {
            DocSet::All => (0..len as DocId).collect(),
            DocSet::Ids(ids) => ids,
        }
    }
}

/// Compiled form of a query tree.
#[derive(Debug)]
enum Plan {
    Literal(String),
    Regex(RegexPattern),
    Filter {
        filter: Filter,
        /// Canonical language for `lang` filters; `None` if unresolvable.
        language: Option<&'static str>,
    },
    And(Vec<Plan>),
    Or(Vec<Plan>),
    Not(Box<Plan>),
}

/// (line index, start, end)
type Span = (usize, usize, usize);

fn sequence_tree(atoms: &[PatternAtom]) -> Result<Re, RegexError> {
    let mut items = Vec::new();
    for (i, atom) in atoms.iter().enumerate() {
        if i > 0 {
            items.push(Re::Literal(' '));
        }
        match atom.kind {
            AtomKind::Regex => items.push(Re::Group(Box::new(pattern::parse(&atom.text)?))),
            AtomKind::Literal => items.extend(atom.search_text().chars().map(Re::Literal)),
        }
    }
    Ok(Re::Concat(items))
}

impl Plan {
    fn compile(node: &Node) -> Result<Plan, RegexError> {
        Ok(match node {
            Node::Sequence(atoms) if atoms.iter().all(|a| !a.is_regex()) => Plan::Literal(
                atoms
                    .iter()
                    .map(PatternAtom::search_text)
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            Node::Sequence(atoms) => Plan::Regex(RegexPattern::from_tree(sequence_tree(atoms)?)?),
            Node::Filter(f) => Plan::Filter {
                language: match f.field {
                    FilterField::Lang => resolve_language(&f.value),
                    _ => None,
                },
                filter: f.clone(),
            },
            Node::And(children) => {
                Plan::And(children.iter().map(Plan::compile).collect::<Result<_, _>>()?)
            }
            Node::Or(children) => {
                Plan::Or(children.iter().map(Plan::compile).collect::<Result<_, _>>()?)
            }
            Node::Not(child) => Plan::Not(Box::new(Plan::compile(child)?)),
        })
    }

    fn candidates(&self, corpus: &Corpus) -> DocSet {
        match self {
            Plan::Literal(text) => trigram_set(corpus, &Required::Literal(text.clone())),
            Plan::Regex(re) => trigram_set(corpus, &re.tree.required()),
            Plan::Filter { .. } | Plan::Not(_) => DocSet::All,
            Plan::And(children) => children
                .iter()
                .fold(DocSet::All, |acc, c| acc.and(c.candidates(corpus))),
            Plan::Or(children) => {
                let mut sets = children.iter().map(|c| c.candidates(corpus));
                let first = sets.next().unwrap_or(DocSet::All);
                sets.fold(first, DocSet::or)
            }
        }
    }

    /// `None` if the document does not qualify, otherwise the spans this
    /// subtree contributes.
    fn evaluate(&self, doc: &Document) -> Option<Vec<Span>> {
        match self {
            Plan::Literal(text) => {
                let spans: Vec<Span> = doc
                    .lines
                    .iter()
                    .enumerate()
                    .flat_map(|(i, line)| {
                        line.match_indices(text.as_str())
                            .map(move |(start, m)| (i, start, start + m.len()))
                    })
                    .collect();
                (!spans.is_empty()).then_some(spans)
            }
            Plan::Regex(re) => {
                let spans: Vec<Span> = doc
                    .lines
                    .iter()
                    .enumerate()
                    .flat_map(|(i, line)| {
                        re.matcher
                            .find_iter(line)
                            .filter(|m| !m.is_empty())
                            .map(move |m| (i, m.start(), m.end()))
                    })
                    .collect();
                (!spans.is_empty()).then_some(spans)
            }
            Plan::Filter { filter, language } => {
                let hit = match filter.field {
                    FilterField::Repo => doc.repo.contains(filter.value.as_str()),
                    FilterField::Path => doc.path.contains(filter.value.as_str()),
                    FilterField::Lang => language.is_some_and(|l| l == doc.language),
                };
                (hit != filter.negated).then(Vec::new)
            }
            Plan::And(children) => {
                let mut spans = Vec::new();
                for child in children {
                    spans.extend(child.evaluate(doc)?);
                }
                Some(spans)
            }
            Plan::Or(children) => {
                let mut qualifies = false;
                let mut spans = Vec::new();
                for child in children {
                    if let Some(s) = child.evaluate(doc) {
                        qualifies = true;
                        spans.extend(s);
                    }
                }
                qualifies.then_some(spans)
            }
            Plan::Not(child) => match child.evaluate(doc) {
                Some(_) => None,
                None => Some(Vec::new()),
            },
        }
    }
}

fn trigram_set(corpus: &Corpus, required: &Required) -> DocSet {
    match required {
        Required::Anything => DocSet::All,
        Required::Literal(text) => match corpus.trigrams().containing(text) {
            Some(ids) => DocSet::Ids(ids),
            None => DocSet::All,
        },
        Required::All(parts) => parts
            .iter()
            .fold(DocSet::All, |acc, p| acc.and(trigram_set(corpus, p))),
        Required::Any(parts) => {
            let mut sets = parts.iter().map(|p| trigram_set(corpus, p));
            let first = sets.next().unwrap_or(DocSet::All);
            sets.fold(first, DocSet::or)
        }
    }
}

/// Lazy stream of match records in `(document, line, start, end)` order.
///
/// Work is done one document at a time as the iterator is advanced.
pub struct Matches<'a> {
    corpus: &'a Corpus,
    plan: Option<Plan>,
    whole_lines: bool,
    candidates: std::vec::IntoIter<DocId>,
    pending: VecDeque<MatchRecord>,
}

impl<'a> Matches<'a> {
    pub fn new(corpus: &'a Corpus, query: &Query) -> Result<Self, SearchError> {
        let (plan, whole_lines, candidates) = match &query.root {
            None => (None, false, Vec::new()),
            Some(root) => {
                let plan = Plan::compile(root)?;
                let candidates = plan.candidates(corpus).into_vec(corpus.len());
                (Some(plan), !root.has_positive_pattern(), candidates)
            }
        };
        Ok(Self {
            corpus,
            plan,
            whole_lines,
            candidates: candidates.into_iter(),
            pending: VecDeque::new(),
        })
    }

    fn fill(&mut self, id: DocId) {
        let doc = self.corpus.document(id);
        let Some(mut spans) = self.plan.as_ref().and_then(|p| p.evaluate(doc)) else {
            return;
        };
        if self.whole_lines {
            spans = doc
                .lines
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.is_empty())
                .map(|(i, l)| (i, 0, l.len()))
                .collect();
        } else {
            spans.sort_unstable();
            spans.dedup();
        }
        self.pending.extend(spans.into_iter().map(|(line, start, end)| MatchRecord {
            repo: doc.repo.clone(),
            path: doc.path.clone(),
            line_number: line + 1,
            start,
            end,
            line_text: doc.lines[line].clone(),
            source: Provenance::Original,
        }));
    }
}

impl Iterator for Matches<'_> {
    type Item = MatchRecord;

    fn next(&mut self) -> Option<MatchRecord> {
        loop {
            if let Some(record) = self.pending.pop_front() {
                return Some(record);
            }
            let id = self.candidates.next()?;
            self.fill(id);
        }
    }
}
