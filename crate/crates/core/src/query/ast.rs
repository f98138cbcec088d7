use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Literal,
    Regex,
}

/// One search pattern as written by the user.
///
/// `text` never includes the surrounding double quotes or regex slashes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternAtom {
    pub text: String,
    pub kind: AtomKind,
    pub quoted: bool,
}

impl PatternAtom {
    pub fn literal(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            kind: AtomKind::Literal,
            quoted: false,
        }
    }

    pub fn quoted(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            kind: AtomKind::Literal,
            quoted: true,
        }
    }

    pub fn regex(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            kind: AtomKind::Regex,
            quoted: false,
        }
    }

    pub fn is_regex(&self) -> bool {
        self.kind == AtomKind::Regex
    }

    /// The literal string this atom contributes to a sequence match.
    ///
    /// Quoted atoms match with their quotes.
    pub fn search_text(&self) -> String {
        if self.quoted {
            format!("\"{}\"", self.text)
        } else {
            self.text.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterField {
    Repo,
    Path,
    Lang,
}

impl FilterField {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterField::Repo => "repo",
            FilterField::Path => "path",
            FilterField::Lang => "lang",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        match name {
            "repo" => Some(FilterField::Repo),
            "path" => Some(FilterField::Path),
            "lang" | "language" => Some(FilterField::Lang),
            _ => None,
        }
    }
}

impl fmt::Display for FilterField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filter {
    pub field: FilterField,
    pub value: String,
    pub negated: bool,
}

impl Filter {
    pub fn new(field: FilterField, value: impl Into<String>) -> Self {
        Self {
            field,
            value: value.into(),
            negated: false,
        }
    }
}

/// A node of the query tree.
///
/// Implicit conjunction (juxtaposition) and explicit `AND` both produce
/// [`Node::And`]; the canonical form lists filters before everything else.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Sequence(Vec<PatternAtom>),
    Filter(Filter),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Box<Node>),
}

impl Node {
    pub fn seq<I, A>(atoms: I) -> Node
    where
        I: IntoIterator<Item = A>,
        A: Into<PatternAtom>,
    {
        Node::Sequence(atoms.into_iter().map(Into::into).collect())
    }

    pub fn is_filter(&self) -> bool {
        matches!(self, Node::Filter(_))
    }

    /// Rewrites the subtree into canonical form: nested conjunctions and
    /// disjunctions are flattened, filters lead each conjunction, and a
    /// negated filter is stored as a filter with `negated` set.
    ///
    /// Returns `None` when nothing is left (for example an empty `And`).
    pub fn normalize(self) -> Option<Node> {
        match self {
            Node::Sequence(atoms) if atoms.is_empty() => None,
            Node::Sequence(_) | Node::Filter(_) => Some(self),
            Node::Not(child) => match child.normalize()? {
                Node::Filter(mut f) => {
                    f.negated = !f.negated;
                    Some(Node::Filter(f))
                }
                other => Some(Node::Not(Box::new(other))),
            },
            Node::And(children) => {
                let mut flat = Vec::new();
                for child in children.into_iter().filter_map(Node::normalize) {
                    match child {
                        Node::And(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                let (mut filters, rest): (Vec<_>, Vec<_>) =
                    flat.into_iter().partition(Node::is_filter);
                filters.extend(rest);
                collapse(filters, Node::And)
            }
            Node::Or(children) => {
                let mut flat = Vec::new();
                for child in children.into_iter().filter_map(Node::normalize) {
                    match child {
                        Node::Or(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                collapse(flat, Node::Or)
            }
        }
    }

    /// Visits every node depth-first, parents before children.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Node)) {
        visit(self);
        match self {
            Node::And(children) | Node::Or(children) => {
                children.iter().for_each(|c| c.walk(visit));
            }
            Node::Not(child) => child.walk(visit),
            Node::Sequence(_) | Node::Filter(_) => {}
        }
    }

    pub(crate) fn walk_mut(&mut self, visit: &mut dyn FnMut(&mut Node)) {
        visit(self);
        match self {
            Node::And(children) | Node::Or(children) => {
                children.iter_mut().for_each(|c| c.walk_mut(visit));
            }
            Node::Not(child) => child.walk_mut(visit),
            Node::Sequence(_) | Node::Filter(_) => {}
        }
    }

    /// Whether a pattern occurs outside any negation.
    pub(crate) fn has_positive_pattern(&self) -> bool {
        match self {
            Node::Sequence(_) => true,
            Node::Filter(_) | Node::Not(_) => false,
            Node::And(children) | Node::Or(children) => {
                children.iter().any(Node::has_positive_pattern)
            }
        }
    }
}

fn collapse(mut nodes: Vec<Node>, make: fn(Vec<Node>) -> Node) -> Option<Node> {
    match nodes.len() {
        0 => None,
        1 => nodes.pop(),
        _ => Some(make(nodes)),
    }
}

impl From<&str> for PatternAtom {
    fn from(text: &str) -> Self {
        PatternAtom::literal(text)
    }
}

/// A parsed query. `root` is `None` for the empty query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Query {
    pub root: Option<Node>,
}

impl Query {
    pub fn empty() -> Self {
        Self { root: None }
    }

    /// Builds a query in canonical form.
    pub fn new(root: Node) -> Self {
        Self {
            root: root.normalize(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Sequences directly under the root conjunction (or the root itself).
    pub fn top_level_sequences(&self) -> impl Iterator<Item = &Vec<PatternAtom>> {
        let children: &[Node] = match &self.root {
            Some(Node::And(children)) => children,
            Some(node) => std::slice::from_ref(node),
            None => &[],
        };
        children.iter().filter_map(|n| match n {
            Node::Sequence(atoms) => Some(atoms),
            _ => None,
        })
    }

    pub fn filters(&self) -> Vec<&Filter> {
        let mut out = Vec::new();
        if let Some(root) = &self.root {
            root.walk(&mut |n| {
                if let Node::Filter(f) = n {
                    out.push(f);
                }
            });
        }
        out
    }

    pub fn atoms(&self) -> Vec<&PatternAtom> {
        let mut out = Vec::new();
        if let Some(root) = &self.root {
            root.walk(&mut |n| {
                if let Node::Sequence(atoms) = n {
                    out.extend(atoms);
                }
            });
        }
        out
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print(self))
    }
}
