use thiserror::Error;

use super::ast::{Filter, FilterField, Node, PatternAtom, Query};
use crate::pattern::{RegexError, RegexPattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unbalanced parentheses: unmatched '{0}'")]
    UnbalancedParen(char),
    #[error("empty parentheses")]
    EmptyGroup,
    #[error("unterminated quoted string")]
    UnterminatedQuote,
    #[error("unterminated regular expression (missing closing '/')")]
    UnterminatedRegex,
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("operator {0} is missing an operand")]
    DanglingOperator(&'static str),
    #[error("expected whitespace or ')' after {0}")]
    MissingSeparator(&'static str),
    #[error("invalid regular expression /{pattern}/: {source}{hint}")]
    InvalidRegex {
        pattern: String,
        source: RegexError,
        hint: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} (query offset {offset})")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    And,
    Or,
    Not,
    Atom(PatternAtom),
    Filter(Filter),
}

/// Parses a query string.
///
/// Whitespace-separated patterns form one ordered sequence; uppercase
/// `AND`, `OR` and `NOT` are operators while lowercase spellings are plain
/// text. `field:value` is a filter for `repo`, `path` and `lang` (alias
/// `language`); `content:value` is a literal pattern.
pub fn parse(input: &str) -> Result<Query, ParseError> {
    let tokens = Lexer::new(input).tokenize()?;
    let mut parser = TokenParser {
        tokens,
        pos: 0,
        end: input.len(),
    };
    if parser.tokens.is_empty() {
        return Ok(Query::empty());
    }
    let node = parser.or_expr()?;
    if let Some((offset, _)) = parser.tokens.get(parser.pos) {
        // The lexer already balances parentheses, so this is an operator
        // sequence the grammar cannot place.
        return Err(ParseError {
            kind: ParseErrorKind::UnbalancedParen(')'),
            offset: *offset,
        });
    }
    Ok(Query::new(node))
}

struct Lexer<'a> {
    input: &'a str,
    pos: usize,
    depth: usize,
    open_offsets: Vec<usize>,
}

fn err(kind: ParseErrorKind, offset: usize) -> ParseError {
    ParseError { kind, offset }
}

fn is_boundary(c: Option<char>) -> bool {
    c.is_none_or(|c| c.is_whitespace() || c == ')')
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Self {
            input,
            pos: 0,
            depth: 0,
            open_offsets: Vec::new(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn tokenize(mut self) -> Result<Vec<(usize, Token)>, ParseError> {
        let mut tokens = Vec::new();
        loop {
            let trimmed = self.rest().trim_start();
            self.pos = self.input.len() - trimmed.len();
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            let token = match c {
                '(' => {
                    self.pos += 1;
                    self.depth += 1;
                    self.open_offsets.push(start);
                    Token::LParen
                }
                ')' => {
                    if self.depth == 0 {
                        return Err(err(ParseErrorKind::UnbalancedParen(')'), start));
                    }
                    self.pos += 1;
                    self.depth -= 1;
                    self.open_offsets.pop();
                    Token::RParen
                }
                '"' => {
                    let text = self.quoted()?;
                    if text.is_empty() {
                        return Err(err(ParseErrorKind::Empty("quoted pattern"), start));
                    }
                    self.expect_boundary("closing quote")?;
                    Token::Atom(PatternAtom::quoted(text))
                }
                '/' => self.regex()?,
                _ => self.word()?,
            };
            tokens.push((start, token));
        }
        if let Some(&offset) = self.open_offsets.last() {
            return Err(err(ParseErrorKind::UnbalancedParen('('), offset));
        }
        Ok(tokens)
    }

    fn expect_boundary(&self, what: &'static str) -> Result<(), ParseError> {
        if is_boundary(self.peek()) {
            Ok(())
        } else {
            Err(err(ParseErrorKind::MissingSeparator(what), self.pos))
        }
    }

    /// Reads a double-quoted string starting at the opening quote.
    fn quoted(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\'))) => out.push(e),
                    Some((_, other)) => {
                        out.push('\\');
                        out.push(other);
                    }
                    None => break,
                },
                c => out.push(c),
            }
        }
        Err(err(ParseErrorKind::UnterminatedQuote, start))
    }

    fn regex(&mut self) -> Result<Token, ParseError> {
        let start = self.pos;
        let body_start = start + 1;
        let mut chars = self.input[body_start..].char_indices();
        let mut close = None;
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    chars.next();
                }
                '/' => {
                    close = Some(body_start + i);
                    break;
                }
                _ => {}
            }
        }
        let Some(close) = close else {
            return Err(err(ParseErrorKind::UnterminatedRegex, start));
        };
        let text = &self.input[body_start..close];
        self.pos = close + 1;
        if text.is_empty() {
            return Err(err(ParseErrorKind::Empty("regular expression"), start));
        }
        if let Err(source) = RegexPattern::new(text) {
            let hint = if text.contains(['(', ')']) {
                " (a literal '(' or ')' might need to be escaped as '\\(' or '\\)')"
            } else {
                ""
            };
            return Err(err(
                ParseErrorKind::InvalidRegex {
                    pattern: text.to_string(),
                    source,
                    hint,
                },
                start,
            ));
        }
        self.expect_boundary("regular expression")?;
        Ok(Token::Atom(PatternAtom::regex(text)))
    }

    fn word(&mut self) -> Result<Token, ParseError> {
        let start = self.pos;
        let rest = self.rest();
        let field_len = rest
            .find(|c: char| !c.is_ascii_lowercase())
            .unwrap_or(rest.len());
        if rest[field_len..].starts_with(':') {
            let name = &rest[..field_len];
            let is_content = name == "content";
            if let Some(field) = FilterField::from_name(name).map(Some).or(is_content.then_some(None))
            {
                self.pos += field_len + 1;
                let value = if self.peek() == Some('"') {
                    let v = self.quoted()?;
                    self.expect_boundary("closing quote")?;
                    v
                } else {
                    let rest = self.rest();
                    let len = rest
                        .find(|c: char| c.is_whitespace() || c == ')')
                        .unwrap_or(rest.len());
                    self.pos += len;
                    rest[..len].to_string()
                };
                if value.is_empty() {
                    let what = if is_content { "content value" } else { "filter value" };
                    return Err(err(ParseErrorKind::Empty(what), start));
                }
                return Ok(match field {
                    Some(field) => Token::Filter(Filter::new(field, value)),
                    None => Token::Atom(PatternAtom::literal(value)),
                });
            }
        }

        // A bare pattern ends at whitespace or at a ')' that does not close
        // a '(' opened inside the same pattern.
        let mut inner_depth = 0usize;
        let mut len = rest.len();
        for (i, c) in rest.char_indices() {
            if c.is_whitespace() {
                len = i;
                break;
            }
            match c {
                '(' => inner_depth += 1,
                ')' if inner_depth == 0 => {
                    len = i;
                    break;
                }
                ')' => inner_depth -= 1,
                _ => {}
            }
        }
        let text = &rest[..len];
        self.pos += len;
        Ok(match text {
            "AND" => Token::And,
            "OR" => Token::Or,
            "NOT" => Token::Not,
            _ => Token::Atom(PatternAtom::literal(text)),
        })
    }
}

struct TokenParser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl TokenParser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn or_expr(&mut self) -> Result<Node, ParseError> {
        let mut children = vec![self.and_expr("OR")?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            children.push(self.and_expr("OR")?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Node::Or(children)
        })
    }

    fn and_expr(&mut self, context: &'static str) -> Result<Node, ParseError> {
        let mut children = vec![self.concat(context)?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            children.push(self.concat("AND")?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Node::And(children)
        })
    }

    /// Juxtaposed terms. Adjacent patterns collect into one sequence;
    /// filters between them do not break the sequence.
    fn concat(&mut self, context: &'static str) -> Result<Node, ParseError> {
        let mut items = Vec::new();
        let mut atoms = Vec::new();
        let mut seq_slot = None;
        loop {
            match self.peek() {
                None | Some(Token::RParen | Token::And | Token::Or) => break,
                Some(Token::Atom(_)) => {
                    let Some((_, Token::Atom(atom))) = self.tokens.get(self.pos).cloned() else {
                        unreachable!()
                    };
                    self.pos += 1;
                    if seq_slot.is_none() {
                        seq_slot = Some(items.len());
                        items.push(None);
                    }
                    atoms.push(atom);
                }
                Some(Token::Filter(f)) => {
                    items.push(Some(Node::Filter(f.clone())));
                    self.pos += 1;
                }
                Some(_) => {
                    if let Some(slot) = seq_slot.take() {
                        items[slot] = Some(Node::Sequence(std::mem::take(&mut atoms)));
                    }
                    items.push(Some(self.unary()?));
                }
            }
        }
        if let Some(slot) = seq_slot {
            items[slot] = Some(Node::Sequence(atoms));
        }
        let mut items: Vec<Node> = items.into_iter().flatten().collect();
        match items.len() {
            0 => Err(self.missing_operand(context)),
            1 => Ok(items.pop().unwrap()),
            _ => Ok(Node::And(items)),
        }
    }

    fn missing_operand(&self, context: &'static str) -> ParseError {
        match self.peek() {
            Some(Token::And) => err(ParseErrorKind::DanglingOperator("AND"), self.offset()),
            Some(Token::Or) => err(ParseErrorKind::DanglingOperator("OR"), self.offset()),
            _ => err(ParseErrorKind::DanglingOperator(context), self.offset()),
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                match self.peek() {
                    None | Some(Token::RParen | Token::And | Token::Or) => {
                        Err(err(ParseErrorKind::DanglingOperator("NOT"), offset))
                    }
                    _ => Ok(Node::Not(Box::new(self.unary()?))),
                }
            }
            Some(Token::LParen) => {
                self.pos += 1;
                if self.peek() == Some(&Token::RParen) {
                    return Err(err(ParseErrorKind::EmptyGroup, offset));
                }
                let inner = self.or_expr()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(err(ParseErrorKind::UnbalancedParen('('), offset)),
                }
            }
            Some(Token::Atom(atom)) => {
                self.pos += 1;
                Ok(Node::Sequence(vec![atom]))
            }
            Some(Token::Filter(f)) => {
                self.pos += 1;
                Ok(Node::Filter(f))
            }
            _ => Err(self.missing_operand("NOT")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Node {
        parse(s).unwrap().root.unwrap()
    }

    #[test]
    fn filters_and_pattern() {
        assert_eq!(
            p("repo:ase path:.tex table"),
            Node::And(vec![
                Node::Filter(Filter::new(FilterField::Repo, "ase")),
                Node::Filter(Filter::new(FilterField::Path, ".tex")),
                Node::seq(["table"]),
            ])
        );
    }

    #[test]
    fn sequence_keeps_order() {
        assert_eq!(p("func parse"), Node::seq(["func", "parse"]));
    }

    #[test]
    fn parenthesized_or() {
        assert_eq!(
            p("(foo OR bar)"),
            Node::Or(vec![Node::seq(["foo"]), Node::seq(["bar"])])
        );
    }

    #[test]
    fn lowercase_keywords_are_text() {
        assert_eq!(p("should not fail"), Node::seq(["should", "not", "fail"]));
        assert_eq!(p("a and b or c"), Node::seq(["a", "and", "b", "or", "c"]));
    }

    #[test]
    fn invalid_regex_is_reported() {
        let e = parse("/func.*(/").unwrap_err();
        match &e.kind {
            ParseErrorKind::InvalidRegex { source, .. } => {
                assert!(source.message.contains("unclosed group"))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(e.to_string().contains("might need to be escaped"));
    }

    #[test]
    fn empty_input() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("  \t ").unwrap().is_empty());
    }

    #[test]
    fn quoted_and_regex_atoms() {
        assert_eq!(
            p(r#""v1.3" /a+b/"#),
            Node::Sequence(vec![PatternAtom::quoted("v1.3"), PatternAtom::regex("a+b")])
        );
        assert_eq!(
            p(r#""say \"hi\"""#),
            Node::Sequence(vec![PatternAtom::quoted(r#"say "hi""#)])
        );
    }

    #[test]
    fn language_alias_and_quoted_values() {
        assert_eq!(
            p(r#"language:python path:"my dir""#),
            Node::And(vec![
                Node::Filter(Filter::new(FilterField::Lang, "python")),
                Node::Filter(Filter::new(FilterField::Path, "my dir")),
            ])
        );
        assert_eq!(
            p(r#"content:"a b""#),
            Node::Sequence(vec![PatternAtom::literal("a b")])
        );
    }

    #[test]
    fn filters_do_not_split_sequences() {
        assert_eq!(
            p("foo lang:go bar"),
            Node::And(vec![
                Node::Filter(Filter::new(FilterField::Lang, "go")),
                Node::seq(["foo", "bar"]),
            ])
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(
            p("a b AND c OR d"),
            Node::Or(vec![
                Node::And(vec![Node::seq(["a", "b"]), Node::seq(["c"])]),
                Node::seq(["d"]),
            ])
        );
        assert_eq!(
            p("NOT repo:x foo"),
            Node::And(vec![
                Node::Filter(Filter {
                    field: FilterField::Repo,
                    value: "x".into(),
                    negated: true
                }),
                Node::seq(["foo"]),
            ])
        );
        assert_eq!(
            p("foo NOT bar"),
            Node::And(vec![
                Node::seq(["foo"]),
                Node::Not(Box::new(Node::seq(["bar"])))
            ])
        );
    }

    #[test]
    fn parens_inside_patterns() {
        assert_eq!(p("parse(s"), Node::seq(["parse(s"]));
        assert_eq!(p("(f(x))"), Node::seq(["f(x)"]));
        assert_eq!(p("func foo(bar, baz"), Node::seq(["func", "foo(bar,", "baz"]));
    }

    #[test]
    fn errors() {
        use ParseErrorKind::*;
        let cases: &[(&str, ParseErrorKind)] = &[
            ("(foo", UnbalancedParen('(')),
            ("foo)", UnbalancedParen(')')),
            ("\"abc", UnterminatedQuote),
            ("/abc", UnterminatedRegex),
            ("foo AND", DanglingOperator("AND")),
            ("AND foo", DanglingOperator("AND")),
            ("OR", DanglingOperator("OR")),
            ("NOT", DanglingOperator("NOT")),
            ("a OR OR b", DanglingOperator("OR")),
            ("()", EmptyGroup),
            ("repo:", Empty("filter value")),
            ("\"\"", Empty("quoted pattern")),
            ("//", Empty("regular expression")),
            ("\"a\"b", MissingSeparator("closing quote")),
            ("/a/b", MissingSeparator("regular expression")),
        ];
        for (input, kind) in cases {
            assert_eq!(&parse(input).unwrap_err().kind, kind, "input {input:?}");
        }
    }
}
