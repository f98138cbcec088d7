//! The supported regular-expression subset.
//!
//! Patterns are parsed into a small syntax tree so that anything outside the
//! subset is rejected up front, literal fragments can be extracted for the
//! trigram prefilter, and a canonical string can be handed to the `regex`
//! crate for matching.

use std::fmt::Write as _;

use thiserror::Error;

/// Largest repetition bound accepted in `{m,n}`.
const MAX_REPEAT: u32 = 1000;

/// Compiled-size ceiling handed to the matcher.
const SIZE_LIMIT: usize = 8 * (1 << 20);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct RegexError {
    pub message: String,
    pub offset: usize,
}

impl RegexError {
    fn new(message: impl Into<String>, offset: usize) -> Self {
        Self {
            message: message.into(),
            offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ClassEscape {
    Word,
    Space,
    Digit,
}

impl ClassEscape {
    fn as_str(self) -> &'static str {
        match self {
            ClassEscape::Word => r"\w",
            ClassEscape::Space => r"\s",
            ClassEscape::Digit => r"\d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum SetItem {
    Char(char),
    Range(char, char),
    Escape(ClassEscape),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Re {
    Empty,
    Literal(char),
    Any,
    LineStart,
    LineEnd,
    WordBoundary,
    Escape(ClassEscape),
    Set { negated: bool, items: Vec<SetItem> },
    Group(Box<Re>),
    Concat(Vec<Re>),
    Alternate(Vec<Re>),
    Repeat {
        inner: Box<Re>,
        min: u32,
        max: Option<u32>,
        lazy: bool,
    },
}

/// Characters with special meaning outside a character class.
fn is_meta(c: char) -> bool {
    matches!(
        c,
        '.' | '*' | '+' | '?' | '|' | '(' | ')' | '[' | ']' | '{' | '}' | '^' | '$'
    )
}

/// Characters that may follow a backslash to denote themselves.
fn is_escapable(c: char) -> bool {
    is_meta(c) || matches!(c, '\\' | '/' | '-')
}

/// Counts regex metasyntax operators in a literal pattern.
///
/// Each of `. * + ? | ( ) [ ] { } ^ $` counts once, as does each class escape
/// `\w \s \d \b`. Escaped metacharacters such as `\.` count zero.
pub fn count_metasyntax(text: &str) -> usize {
    let mut count = 0;
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                if matches!(next, 'w' | 's' | 'd' | 'b') {
                    count += 1;
                }
            }
        } else if is_meta(c) {
            count += 1;
        }
    }
    count
}

/// Parses `text` under the supported subset.
pub(crate) fn parse(text: &str) -> Result<Re, RegexError> {
    let mut parser = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        len: text.len(),
    };
    let re = parser.alternation(0)?;
    if let Some((offset, c)) = parser.peek_indexed() {
        debug_assert_eq!(c, ')');
        return Err(RegexError::new("unbalanced ')'", offset));
    }
    Ok(re)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_indexed(&self) -> Option<(usize, char)> {
        self.chars.get(self.pos).copied()
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(o, _)| o)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn alternation(&mut self, depth: usize) -> Result<Re, RegexError> {
        let mut branches = vec![self.concat(depth)?];
        while self.peek() == Some('|') {
            self.bump();
            branches.push(self.concat(depth)?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Re::Alternate(branches)
        })
    }

    fn concat(&mut self, depth: usize) -> Result<Re, RegexError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some('|') => break,
                Some(')') => {
                    if depth == 0 {
                        return Err(RegexError::new("unbalanced ')'", self.offset()));
                    }
                    break;
                }
                _ => {
                    let atom = self.atom(depth)?;
                    items.push(self.quantifiers(atom)?);
                }
            }
        }
        Ok(match items.len() {
            0 => Re::Empty,
            1 => items.pop().unwrap(),
            _ => Re::Concat(items),
        })
    }

    fn atom(&mut self, depth: usize) -> Result<Re, RegexError> {
        let offset = self.offset();
        let c = self.bump().expect("atom called at end of input");
        Ok(match c {
            '.' => Re::Any,
            '^' => Re::LineStart,
            '$' => Re::LineEnd,
            '(' => {
                if self.peek() == Some('?') {
                    return Err(RegexError::new(
                        "group flags '(?' are not supported",
                        offset,
                    ));
                }
                let inner = self.alternation(depth + 1)?;
                if self.bump() != Some(')') {
                    return Err(RegexError::new("unclosed group '('", offset));
                }
                Re::Group(Box::new(inner))
            }
            '[' => self.set(offset)?,
            '\\' => self.escape(offset, false)?,
            '*' | '+' | '?' => {
                return Err(RegexError::new(
                    format!("repetition operator '{c}' has nothing to repeat"),
                    offset,
                ))
            }
            '{' => {
                return Err(RegexError::new(
                    "'{' must start a repetition or be escaped",
                    offset,
                ))
            }
            ']' | '}' => {
                return Err(RegexError::new(
                    format!("unbalanced '{c}' must be escaped"),
                    offset,
                ))
            }
            '/' => {
                return Err(RegexError::new(
                    "'/' must be escaped inside a regular expression",
                    offset,
                ))
            }
            c => Re::Literal(c),
        })
    }

    fn escape(&mut self, offset: usize, in_set: bool) -> Result<Re, RegexError> {
        let Some(c) = self.bump() else {
            return Err(RegexError::new("trailing backslash", offset));
        };
        Ok(match c {
            'w' => Re::Escape(ClassEscape::Word),
            's' => Re::Escape(ClassEscape::Space),
            'd' => Re::Escape(ClassEscape::Digit),
            'b' if !in_set => Re::WordBoundary,
            c if is_escapable(c) => Re::Literal(c),
            c => {
                return Err(RegexError::new(
                    format!("unsupported escape '\\{c}'"),
                    offset,
                ))
            }
        })
    }

    fn set(&mut self, open: usize) -> Result<Re, RegexError> {
        let negated = if self.peek() == Some('^') {
            self.bump();
            true
        } else {
            false
        };
        let mut items = Vec::new();
        loop {
            let offset = self.offset();
            let c = match self.bump() {
                None => return Err(RegexError::new("unclosed character class '['", open)),
                Some(']') if items.is_empty() => {
                    return Err(RegexError::new("empty character class", open))
                }
                Some(']') => break,
                Some(c) => c,
            };
            let start = if c == '\\' {
                match self.escape(offset, true)? {
                    Re::Literal(c) => c,
                    Re::Escape(e) => {
                        items.push(SetItem::Escape(e));
                        continue;
                    }
                    _ => unreachable!(),
                }
            } else if c == '[' {
                return Err(RegexError::new("'[' must be escaped inside a class", offset));
            } else {
                c
            };
            // A '-' followed by ']' is a literal dash.
            let is_range = self.peek() == Some('-')
                && self.chars.get(self.pos + 1).is_some_and(|&(_, c)| c != ']');
            if !is_range {
                items.push(SetItem::Char(start));
                continue;
            }
            self.bump();
            let end_offset = self.offset();
            let end = match self.bump() {
                Some('\\') => match self.escape(end_offset, true)? {
                    Re::Literal(c) => c,
                    _ => {
                        return Err(RegexError::new(
                            "class escape cannot end a range",
                            end_offset,
                        ))
                    }
                },
                Some(c) => c,
                None => return Err(RegexError::new("unclosed character class '['", open)),
            };
            if end < start {
                return Err(RegexError::new(
                    format!("invalid range '{start}-{end}'"),
                    offset,
                ));
            }
            items.push(SetItem::Range(start, end));
        }
        Ok(Re::Set { negated, items })
    }

    fn quantifiers(&mut self, atom: Re) -> Result<Re, RegexError> {
        let offset = self.offset();
        let (min, max) = match self.peek() {
            Some('*') => (0, None),
            Some('+') => (1, None),
            Some('?') => (0, Some(1)),
            Some('{') => {
                let saved = self.pos;
                self.bump();
                match self.bounds() {
                    Some(bounds) => {
                        self.pos = saved;
                        bounds
                    }
                    None => {
                        return Err(RegexError::new(
                            "'{' must start a repetition or be escaped",
                            offset,
                        ))
                    }
                }
            }
            _ => return Ok(atom),
        };
        if matches!(atom, Re::LineStart | Re::LineEnd | Re::WordBoundary) {
            return Err(RegexError::new("cannot repeat an anchor", offset));
        }
        if let Some(max) = max {
            if max < min {
                return Err(RegexError::new("repetition bounds out of order", offset));
            }
        }
        if min > MAX_REPEAT || max.is_some_and(|m| m > MAX_REPEAT) {
            return Err(RegexError::new(
                format!("repetition bound exceeds {MAX_REPEAT}"),
                offset,
            ));
        }
        if self.peek() == Some('{') {
            while self.bump() != Some('}') {}
        } else {
            self.bump();
        }
        let lazy = if self.peek() == Some('?') {
            self.bump();
            true
        } else {
            false
        };
        if matches!(self.peek(), Some('*' | '+' | '?' | '{')) {
            return Err(RegexError::new("nested repetition operator", self.offset()));
        }
        Ok(Re::Repeat {
            inner: Box::new(atom),
            min,
            max,
            lazy,
        })
    }

    /// Reads `m}`, `m,}` or `m,n}` after an opening brace.
    fn bounds(&mut self) -> Option<(u32, Option<u32>)> {
        let min = self.number()?;
        match self.bump()? {
            '}' => Some((min, Some(min))),
            ',' => {
                if self.peek() == Some('}') {
                    self.bump();
                    return Some((min, None));
                }
                let max = self.number()?;
                (self.bump()? == '}').then_some((min, Some(max)))
            }
            _ => None,
        }
    }

    fn number(&mut self) -> Option<u32> {
        let mut digits = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            digits.push(c);
            self.bump();
        }
        // Saturate rather than overflow; the caller enforces the bound.
        (!digits.is_empty()).then(|| digits.parse().unwrap_or(u32::MAX))
    }
}

impl Re {
    /// Renders the tree as a pattern for the `regex` crate.
    pub(crate) fn to_regex_string(&self) -> String {
        let mut out = String::new();
        self.render(&mut out);
        out
    }

    fn render(&self, out: &mut String) {
        match self {
            Re::Empty => {}
            Re::Literal(c) => out.push_str(&regex::escape(c.encode_utf8(&mut [0; 4]))),
            Re::Any => out.push('.'),
            Re::LineStart => out.push('^'),
            Re::LineEnd => out.push('$'),
            Re::WordBoundary => out.push_str(r"\b"),
            Re::Escape(e) => out.push_str(e.as_str()),
            Re::Set { negated, items } => {
                out.push('[');
                if *negated {
                    out.push('^');
                }
                for item in items {
                    match item {
                        SetItem::Char(c) => out.push_str(&escape_in_set(*c)),
                        SetItem::Range(a, b) => {
                            out.push_str(&escape_in_set(*a));
                            out.push('-');
                            out.push_str(&escape_in_set(*b));
                        }
                        SetItem::Escape(e) => out.push_str(e.as_str()),
                    }
                }
                out.push(']');
            }
            Re::Group(inner) => {
                out.push_str("(?:");
                inner.render(out);
                out.push(')');
            }
            Re::Concat(items) => items.iter().for_each(|i| i.render(out)),
            Re::Alternate(branches) => {
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push('|');
                    }
                    b.render(out);
                }
            }
            Re::Repeat {
                inner,
                min,
                max,
                lazy,
            } => {
                out.push_str("(?:");
                inner.render(out);
                out.push(')');
                match (min, max) {
                    (0, None) => out.push('*'),
                    (1, None) => out.push('+'),
                    (0, Some(1)) => out.push('?'),
                    (m, None) => write!(out, "{{{m},}}").unwrap(),
                    (m, Some(n)) if m == n => write!(out, "{{{m}}}").unwrap(),
                    (m, Some(n)) => write!(out, "{{{m},{n}}}").unwrap(),
                }
                if *lazy {
                    out.push('?');
                }
            }
        }
    }
}

fn escape_in_set(c: char) -> String {
    if c.is_ascii_punctuation() {
        format!("\\{c}")
    } else {
        c.to_string()
    }
}

/// Literal fragments every match must contain, as a boolean formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Required {
    /// No constraint can be derived.
    Anything,
    /// The literal must occur somewhere in the matching line.
    Literal(String),
    All(Vec<Required>),
    Any(Vec<Required>),
}

impl Required {
    fn and(parts: Vec<Required>) -> Required {
        let parts: Vec<_> = parts
            .into_iter()
            .filter(|p| *p != Required::Anything)
            .collect();
        match parts.len() {
            0 => Required::Anything,
            1 => parts.into_iter().next().unwrap(),
            _ => Required::All(parts),
        }
    }

    fn or(parts: Vec<Required>) -> Required {
        if parts.is_empty() || parts.contains(&Required::Anything) {
            Required::Anything
        } else if parts.len() == 1 {
            parts.into_iter().next().unwrap()
        } else {
            Required::Any(parts)
        }
    }
}

impl Re {
    /// Derives the mandatory literals of the pattern.
    pub(crate) fn required(&self) -> Required {
        match self {
            Re::Literal(c) => Required::Literal(c.to_string()),
            Re::Group(inner) => inner.required(),
            Re::Repeat { inner, min, .. } if *min >= 1 => inner.required(),
            Re::Alternate(branches) => Required::or(branches.iter().map(Re::required).collect()),
            Re::Concat(items) => {
                let mut parts = Vec::new();
                let mut run = String::new();
                for item in items {
                    match item {
                        Re::Literal(c) => run.push(*c),
                        // Zero-width assertions do not separate adjacent literals.
                        Re::LineStart | Re::LineEnd | Re::WordBoundary => {}
                        other => {
                            if !run.is_empty() {
                                parts.push(Required::Literal(std::mem::take(&mut run)));
                            }
                            parts.push(other.required());
                        }
                    }
                }
                if !run.is_empty() {
                    parts.push(Required::Literal(run));
                }
                Required::and(parts)
            }
            _ => Required::Anything,
        }
    }
}

/// A validated pattern from the subset together with its compiled matcher.
#[derive(Debug, Clone)]
pub struct RegexPattern {
    pub(crate) tree: Re,
    pub(crate) matcher: regex::Regex,
}

impl RegexPattern {
    pub fn new(text: &str) -> Result<Self, RegexError> {
        let tree = parse(text)?;
        Self::from_tree(tree)
    }

    pub(crate) fn from_tree(tree: Re) -> Result<Self, RegexError> {
        let matcher = regex::RegexBuilder::new(&tree.to_regex_string())
            .size_limit(SIZE_LIMIT)
            .build()
            .map_err(|e| RegexError::new(format!("pattern too complex: {e}"), 0))?;
        Ok(Self { tree, matcher })
    }

    pub fn is_match(&self, haystack: &str) -> bool {
        self.matcher.is_match(haystack)
    }
}

/// Whether `text` is a valid pattern under the subset.
pub fn compiles(text: &str) -> bool {
    RegexPattern::new(text).is_ok()
}

/// Escapes bare `/` so that `text` can sit between regex delimiters.
pub fn escape_delimiters(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                out.push('\\');
                if let Some(next) = chars.next() {
                    out.push(next);
                }
            }
            '/' => out.push_str(r"\/"),
            c => out.push(c),
        }
    }
    out
}
