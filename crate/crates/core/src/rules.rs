//! Atomic query rewrites.
//!
//! Each rule pairs a static precondition with a transformation of the query
//! tree. Rules are ordered from most specific (`language`) to most general
//! (`and`); that order drives both candidate generation and evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::resolve_language;
use crate::pattern::{compiles, count_metasyntax, escape_delimiters};
use crate::query::{Filter, FilterField, Node, PatternAtom, Query};

/// Metasyntax operators needed before a literal is read as a regex.
const REGEX_HEURISTIC_THRESHOLD: usize = 2;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum RuleId {
    Language,
    Regex,
    Unquote,
    And,
}

impl RuleId {
    /// All rules in priority order.
    pub const ALL: [RuleId; 4] = [RuleId::Language, RuleId::Regex, RuleId::Unquote, RuleId::And];

    /// 1 for the most specific rule, 4 for the most general.
    pub fn rank(self) -> usize {
        self as usize + 1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Language => "language",
            RuleId::Regex => "regex",
            RuleId::Unquote => "unquote",
            RuleId::And => "and",
        }
    }

    /// User-facing action text.
    pub fn description(self) -> &'static str {
        match self {
            RuleId::Language => "Apply language filter for pattern",
            RuleId::Regex => "Interpret pattern as a regular expression",
            RuleId::Unquote => "Search without quotes",
            RuleId::And => "Also search for each term separately",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule {0:?}")]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

/// Describes a composition of rules, e.g. for a proposal in an alert.
pub fn describe(rules: &[RuleId]) -> String {
    let mut out = String::new();
    for (i, rule) in rules.iter().enumerate() {
        let text = rule.description();
        if i == 0 {
            out.push_str(text);
        } else {
            out.push_str(" and ");
            let mut chars = text.chars();
            if let Some(first) = chars.next() {
                out.extend(first.to_lowercase());
                out.push_str(chars.as_str());
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule `{0}` does not apply to this query")]
pub struct NotApplicable(pub RuleId);

/// A source of rule preconditions and transformations.
///
/// The generator works against this trait so that the rule set can be
/// wrapped, e.g. to count transformations.
pub trait RuleSet {
    fn applicable(&self, id: RuleId, query: &Query) -> bool;
    fn apply(&self, id: RuleId, query: &Query) -> Result<Query, NotApplicable>;
}

/// The built-in rules.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardRules;

impl RuleSet for StandardRules {
    fn applicable(&self, id: RuleId, query: &Query) -> bool {
        applicable(id, query)
    }

    fn apply(&self, id: RuleId, query: &Query) -> Result<Query, NotApplicable> {
        apply(id, query)
    }
}

pub fn applicable(id: RuleId, query: &Query) -> bool {
    match id {
        RuleId::Language => language_target(query).is_some(),
        RuleId::Regex => regex_target(query).is_some(),
        RuleId::Unquote => query.atoms().iter().any(|a| a.quoted),
        RuleId::And => query.top_level_sequences().any(|s| s.len() >= 2),
    }
}

/// Returns the rewritten query; the input is left untouched.
pub fn apply(id: RuleId, query: &Query) -> Result<Query, NotApplicable> {
    let root = query.root.clone().ok_or(NotApplicable(id))?;
    let rewritten = match id {
        RuleId::Language => {
            let (child, atom, language) = language_target(query).ok_or(NotApplicable(id))?;
            let filter = Node::Filter(Filter::new(FilterField::Lang, language));
            let mut children = into_conjuncts(root);
            if let Node::Sequence(atoms) = &mut children[child] {
                atoms.remove(atom);
            }
            children.push(filter);
            Node::And(children)
        }
        RuleId::Regex => {
            let target = regex_target(query).ok_or(NotApplicable(id))?;
            let mut seen = 0;
            let mut root = root;
            root.walk_mut(&mut |node| {
                if let Node::Sequence(atoms) = node {
                    if seen == target.sequence {
                        match target.atom {
                            Some(i) => {
                                atoms[i] = PatternAtom::regex(escape_delimiters(&atoms[i].text))
                            }
                            None => {
                                *atoms = vec![PatternAtom::regex(escape_delimiters(
                                    &joined_text(atoms),
                                ))]
                            }
                        }
                    }
                    seen += 1;
                }
            });
            root
        }
        RuleId::Unquote => {
            if !applicable(id, query) {
                return Err(NotApplicable(id));
            }
            let mut root = root;
            root.walk_mut(&mut |node| {
                if let Node::Sequence(atoms) = node {
                    atoms.iter_mut().for_each(|a| a.quoted = false);
                }
            });
            root
        }
        RuleId::And => {
            if !applicable(id, query) {
                return Err(NotApplicable(id));
            }
            let children = into_conjuncts(root)
                .into_iter()
                .map(|child| match child {
                    Node::Sequence(atoms) if atoms.len() >= 2 => Node::And(
                        atoms.into_iter().map(|a| Node::Sequence(vec![a])).collect(),
                    ),
                    other => other,
                })
                .collect();
            Node::And(children)
        }
    };
    Ok(Query::new(rewritten))
}

/// The root as a list of conjuncts.
fn into_conjuncts(root: Node) -> Vec<Node> {
    match root {
        Node::And(children) => children,
        other => vec![other],
    }
}

fn conjuncts(query: &Query) -> &[Node] {
    match &query.root {
        Some(Node::And(children)) => children,
        Some(node) => std::slice::from_ref(node),
        None => &[],
    }
}

fn is_plain_literal(atom: &PatternAtom) -> bool {
    !atom.quoted && !atom.is_regex()
}

/// (conjunct index, atom index, canonical language) of the first top-level
/// atom that names a language, provided no `lang` filter is present.
fn language_target(query: &Query) -> Option<(usize, usize, &'static str)> {
    if query.filters().iter().any(|f| f.field == FilterField::Lang) {
        return None;
    }
    conjuncts(query).iter().enumerate().find_map(|(ci, node)| match node {
        Node::Sequence(atoms) => atoms.iter().enumerate().find_map(|(ai, atom)| {
            is_plain_literal(atom)
                .then(|| resolve_language(&atom.text))
                .flatten()
                .map(|lang| (ci, ai, lang))
        }),
        _ => None,
    })
}

struct RegexTarget {
    /// Index of the sequence in depth-first order.
    sequence: usize,
    /// The atom to convert, or `None` for the whole sequence.
    atom: Option<usize>,
}

fn looks_like_regex(text: &str) -> bool {
    count_metasyntax(text) >= REGEX_HEURISTIC_THRESHOLD && compiles(&escape_delimiters(text))
}

fn joined_text(atoms: &[PatternAtom]) -> String {
    atoms
        .iter()
        .map(|a| a.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

fn regex_target(query: &Query) -> Option<RegexTarget> {
    let root = query.root.as_ref()?;
    let mut sequences = Vec::new();
    root.walk(&mut |node| {
        if let Node::Sequence(atoms) = node {
            sequences.push(atoms);
        }
    });
    sequences.into_iter().enumerate().find_map(|(si, atoms)| {
        if let Some(ai) = atoms
            .iter()
            .position(|a| is_plain_literal(a) && looks_like_regex(&a.text))
        {
            return Some(RegexTarget {
                sequence: si,
                atom: Some(ai),
            });
        }
        let joinable = atoms.len() >= 2 && atoms.iter().all(is_plain_literal);
        (joinable && looks_like_regex(&joined_text(atoms))).then_some(RegexTarget {
            sequence: si,
            atom: None,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse, print};

    fn rewrite(id: RuleId, q: &str) -> String {
        print(&apply(id, &parse(q).unwrap()).unwrap())
    }

    #[test]
    fn rule_examples() {
        assert_eq!(rewrite(RuleId::And, "func parse"), "func AND parse");
        assert_eq!(rewrite(RuleId::Unquote, "\"v1.3\""), "v1.3");
        assert_eq!(rewrite(RuleId::Regex, "func.*parse"), "/func.*parse/");
        assert_eq!(rewrite(RuleId::Language, "python"), "lang:python");
        assert_eq!(
            rewrite(RuleId::Language, "jest test typescript"),
            "lang:typescript jest test"
        );
    }

    #[test]
    fn preconditions() {
        let q = |s| parse(s).unwrap();
        assert!(applicable(RuleId::And, &q("func parse")));
        assert!(!applicable(RuleId::And, &q("func")));
        assert!(!applicable(RuleId::And, &q("a OR b c")));
        assert!(!applicable(RuleId::Language, &q("lang:go python")));
        assert!(!applicable(RuleId::Language, &q("\"python\"")));
        assert!(applicable(RuleId::Language, &q("Golang tips")));
        assert!(applicable(RuleId::Regex, &q("swing.*")));
        assert!(!applicable(RuleId::Regex, &q("v1.3")));
        assert!(!applicable(RuleId::Regex, &q("/a.*b/")));
        assert!(!applicable(RuleId::Regex, &q("func.*(")));
        assert!(applicable(RuleId::Unquote, &q("x \"y\"")));
        assert!(!applicable(RuleId::Unquote, &q("x y")));
        assert!(!applicable(RuleId::Language, &Query::empty()));
    }

    #[test]
    fn regex_prefers_atoms_then_joined_sequence() {
        assert_eq!(rewrite(RuleId::Regex, "foo a.*b c+?"), "foo /a.*b/ c+?");
        assert_eq!(rewrite(RuleId::Regex, "a.b c.d"), "/a.b c.d/");
        assert_eq!(rewrite(RuleId::Regex, "path/to.*x"), r"/path\/to.*x/");
    }

    #[test]
    fn rewrites_leave_input_alone_and_are_not_reapplicable() {
        for (id, text) in [
            (RuleId::And, "a b lang:go"),
            (RuleId::Unquote, "\"a\" \"b c\""),
            (RuleId::Language, "go python"),
            (RuleId::Regex, "x.*y"),
        ] {
            let q = parse(text).unwrap();
            let before = q.clone();
            let out = apply(id, &q).unwrap();
            assert_eq!(q, before);
            assert_ne!(out, q);
            if id != RuleId::Regex {
                assert!(!applicable(id, &out), "{id} reapplies to {}", print(&out));
            }
        }
    }

    #[test]
    fn not_applicable_is_an_error() {
        assert_eq!(
            apply(RuleId::Unquote, &parse("x").unwrap()),
            Err(NotApplicable(RuleId::Unquote))
        );
    }

    #[test]
    fn descriptions_and_names() {
        assert_eq!(RuleId::Language.description(), "Apply language filter for pattern");
        assert_eq!(
            describe(&[RuleId::Language, RuleId::And]),
            "Apply language filter for pattern and also search for each term separately"
        );
        assert_eq!("unquote".parse::<RuleId>(), Ok(RuleId::Unquote));
        assert_eq!(serde_json::to_string(&RuleId::And).unwrap(), "\"and\"");
        let mut sorted = vec![RuleId::And, RuleId::Language, RuleId::Unquote, RuleId::Regex];
        sorted.sort();
        assert_eq!(sorted, RuleId::ALL);
    }
}
