#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

use smartsearch::corpus::{resolve_language, IngestConfig, Searcher, SearchError};
use smartsearch::query::{AtomKind, FilterField, Node, PatternAtom, Query};
use smartsearch::{evaluate, Corpus, Document, EvalConfig, Event, MatchRecord};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn mini_corpus() -> Corpus {
    let (corpus, report) = Corpus::ingest(&fixtures().join("mini"), &IngestConfig::default()).unwrap();
    assert_eq!(report.files_indexed, 12);
    corpus
}

pub const WORDS: &[&str] = &[
    "jest", "test", "typescript", "func", "parse", "python", "go", "rust", "main", "v1.3", "foo",
    "bar", "baz", "error", "return", "x", "a.b", "fo", "tests", "Parse",
];

const SEPARATORS: &[&str] = &[" ", " ", " ", ", ", "(", ") ", ".", "\"", " = "];
const EXTENSIONS: &[&str] = &["py", "go", "ts", "rs", "md", "txt", "java", "js"];
const REPOS: &[&str] = &["alpha", "beta", "gamma", "alphabet"];

pub const REGEXES: &[&str] = &[
    "fo+", "ba[rz]", "f.o", "pa(r|s)se", "v1\\.3", "te?st", "^func", "return$", "\\w+s", "[a-c]+",
    "(jest|test)", "a.b", "go*", ".*", "x?", "[^ ]+\\(", "e[a-z]{1,2}r",
];

pub fn random_line(rng: &mut StdRng) -> String {
    let n = rng.gen_range(0..8);
    let mut line = String::new();
    for i in 0..n {
        if i > 0 {
            line.push_str(SEPARATORS.choose(rng).unwrap());
        }
        line.push_str(WORDS.choose(rng).unwrap());
    }
    line
}

pub fn random_corpus(rng: &mut StdRng, files: usize, max_lines: usize) -> Corpus {
    let docs = (0..files)
        .map(|i| {
            let repo = *REPOS.choose(rng).unwrap();
            let dir = ["src", "lib", "test", "docs"].choose(rng).unwrap();
            let ext = EXTENSIONS.choose(rng).unwrap();
            let lines: Vec<String> = (0..rng.gen_range(0..=max_lines)).map(|_| random_line(rng)).collect();
            Document::new(repo, format!("{dir}/f{i}.{ext}"), &lines.join("\n"))
        })
        .collect();
    Corpus::from_documents(docs)
}

fn random_term(rng: &mut StdRng) -> String {
    match rng.gen_range(0..10) {
        0..=4 => WORDS.choose(rng).unwrap().to_string(),
        5 => format!("\"{}\"", WORDS.choose(rng).unwrap()),
        6 => format!("/{}/", REGEXES.choose(rng).unwrap()),
        7 => format!("lang:{}", ["python", "go", "golang", "ts", "cobol", "markdown"].choose(rng).unwrap()),
        8 => format!("repo:{}", ["alpha", "beta", "gam", "zzz"].choose(rng).unwrap()),
        _ => format!("path:{}", ["src", "test", ".py", "f1"].choose(rng).unwrap()),
    }
}

fn random_expr(rng: &mut StdRng, depth: usize) -> String {
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..8) };
    match choice {
        0..=2 => (0..rng.gen_range(1..=3)).map(|_| random_term(rng)).collect::<Vec<_>>().join(" "),
        3 => format!("{} AND {}", random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        4 => format!("{} OR {}", random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        5 => format!("NOT {}", random_term(rng)),
        6 => format!("({})", random_expr(rng, depth - 1)),
        _ => format!("{} {}", random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
    }
}

/// A random query string; most parse, some deliberately do not.
pub fn random_query(rng: &mut StdRng) -> String {
    let mut q = random_expr(rng, 2);
    if rng.gen_ratio(1, 30) {
        q.push_str([" AND", " (", "\"open", " /a(/"].choose(rng).unwrap());
    }
    q
}

/// Key used to compare match streams.
pub type Loc = (String, String, usize, usize, usize);

pub fn loc(m: &MatchRecord) -> Loc {
    (m.repo.clone(), m.path.clone(), m.line_number, m.start, m.end)
}

fn has_positive_pattern(n: &Node) -> bool {
    match n {
        Node::Sequence(_) => true,
        Node::Filter(_) | Node::Not(_) => false,
        Node::And(c) | Node::Or(c) => c.iter().any(has_positive_pattern),
    }
}

/// Spans for a doc by brute force; `None` when the doc does not qualify.
fn oracle_eval(n: &Node, doc: &Document) -> Option<Vec<(usize, usize, usize)>> {
    match n {
        Node::Sequence(atoms) => {
            let mut spans = Vec::new();
            if atoms.iter().all(|a| a.kind == AtomKind::Literal) {
                let needle = atoms.iter().map(search_text).collect::<Vec<_>>().join(" ");
                for (i, line) in doc.lines.iter().enumerate() {
                    let mut from = 0;
                    while let Some(pos) = line[from..].find(&needle) {
                        spans.push((i, from + pos, from + pos + needle.len()));
                        from += pos + needle.len();
                    }
                }
            } else {
                let pattern = atoms
                    .iter()
                    .map(|a| match a.kind {
                        AtomKind::Regex => format!("(?:{})", a.text),
                        AtomKind::Literal => regex::escape(&search_text(a)),
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                let re = Regex::new(&pattern).unwrap();
                for (i, line) in doc.lines.iter().enumerate() {
                    for m in re.find_iter(line) {
                        if m.start() < m.end() {
                            spans.push((i, m.start(), m.end()));
                        }
                    }
                }
            }
            (!spans.is_empty()).then_some(spans)
        }
        Node::Filter(f) => {
            let hit = match f.field {
                FilterField::Repo => doc.repo.contains(&f.value),
                FilterField::Path => doc.path.contains(&f.value),
                FilterField::Lang => resolve_language(&f.value) == Some(doc.language.as_str()),
            };
            (hit != f.negated).then(Vec::new)
        }
        Node::And(children) => {
            let mut all = Vec::new();
            for c in children {
                all.extend(oracle_eval(c, doc)?);
            }
            Some(all)
        }
        Node::Or(children) => {
            let results: Vec<_> = children.iter().filter_map(|c| oracle_eval(c, doc)).collect();
            (!results.is_empty()).then(|| results.concat())
        }
        Node::Not(child) => match oracle_eval(child, doc) {
            Some(_) => None,
            None => Some(Vec::new()),
        },
    }
}

fn search_text(a: &PatternAtom) -> String {
    if a.quoted {
        format!("\"{}\"", a.text)
    } else {
        a.text.clone()
    }
}

/// Naive full-scan reference: every document, every line, no index.
pub fn oracle_search(corpus: &Corpus, query: &Query) -> Vec<Loc> {
    let Some(root) = &query.root else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for doc in corpus.documents() {
        let Some(mut spans) = oracle_eval(root, doc) else {
            continue;
        };
        if !has_positive_pattern(root) {
            spans = doc
                .lines
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.is_empty())
                .map(|(i, l)| (i, 0, l.len()))
                .collect();
        }
        spans.sort();
        spans.dedup();
        out.extend(
            spans
                .into_iter()
                .map(|(i, s, e)| (doc.repo.clone(), doc.path.clone(), i + 1, s, e)),
        );
    }
    out
}

/// Counts how many searches are started.
pub struct Counting<'a, S: Searcher> {
    pub inner: &'a S,
    pub calls: AtomicUsize,
}

impl<'a, S: Searcher> Counting<'a, S> {
    pub fn new(inner: &'a S) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<S: Searcher> Searcher for Counting<'_, S> {
    fn matches<'a>(
        &'a self,
        query: &Query,
    ) -> Result<Box<dyn Iterator<Item = MatchRecord> + Send + 'a>, SearchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.matches(query)
    }
}

/// Sleeps a query-dependent amount before each record, so that parallel
/// workers finish in a scrambled order.
pub struct Jittery<'a> {
    pub inner: &'a Corpus,
    pub seed: u64,
}

impl Searcher for Jittery<'_> {
    fn matches<'a>(
        &'a self,
        query: &Query,
    ) -> Result<Box<dyn Iterator<Item = MatchRecord> + Send + 'a>, SearchError> {
        let text = query.to_string();
        let h = text.bytes().fold(self.seed, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
        let micros = h % 300;
        Ok(Box::new(self.inner.matches(query)?.inspect(move |_| {
            std::thread::sleep(Duration::from_micros(micros));
        })))
    }
}

pub fn events(searcher: &dyn Searcher, query: &str, config: &EvalConfig) -> Vec<Event> {
    let mut out = Vec::new();
    let _ = evaluate(searcher, query, config, &mut |e| out.push(e));
    out
}

pub fn lines(events: &[Event]) -> String {
    events.iter().map(Event::to_line).collect()
}
