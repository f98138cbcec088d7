use super::ast::{AtomKind, Filter, Node, PatternAtom, Query};
use super::parse::parse;

/// Renders a query in canonical form.
///
/// Filters come first at each conjunction level, operators are uppercase
/// and separated by single spaces, regex atoms are wrapped in `/.../` and
/// quoted atoms in `"..."`. Parsing the output yields the same tree.
pub fn print(query: &Query) -> String {
    let mut out = String::new();
    if let Some(root) = &query.root {
        node(root, &mut out);
    }
    out
}

fn node(n: &Node, out: &mut String) {
    match n {
        Node::Sequence(atoms) => sequence(atoms, out),
        Node::Filter(f) => filter(f, out),
        Node::And(children) => {
            let mut first = true;
            let mut after_filter = false;
            for child in children {
                if !first {
                    out.push_str(if after_filter { " " } else { " AND " });
                }
                first = false;
                after_filter = child.is_filter();
                match child {
                    Node::Or(_) => group(child, out),
                    other => node(other, out),
                }
            }
        }
        Node::Or(children) => {
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(" OR ");
                }
                node(child, out);
            }
        }
        Node::Not(child) => {
            out.push_str("NOT ");
            match child.as_ref() {
                Node::Sequence(atoms) if atoms.len() == 1 => node(child, out),
                Node::Not(_) | Node::Filter(_) => node(child, out),
                other => group(other, out),
            }
        }
    }
}

fn group(n: &Node, out: &mut String) {
    out.push('(');
    node(n, out);
    out.push(')');
}

fn sequence(atoms: &[PatternAtom], out: &mut String) {
    for (i, atom) in atoms.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&render_atom(atom));
    }
}

/// Renders a single atom the way it would appear in a query.
pub fn render_atom(atom: &PatternAtom) -> String {
    match atom.kind {
        AtomKind::Regex => format!("/{}/", atom.text),
        AtomKind::Literal if atom.quoted => quote(&atom.text),
        AtomKind::Literal if is_bare(&atom.text) => atom.text.clone(),
        AtomKind::Literal => format!("content:{}", quote(&atom.text)),
    }
}

fn filter(f: &Filter, out: &mut String) {
    if f.negated {
        out.push_str("NOT ");
    }
    out.push_str(f.field.as_str());
    out.push(':');
    let bare = !f.value.is_empty()
        && !f.value.starts_with('"')
        && !f.value.contains(|c: char| c.is_whitespace() || c == ')');
    if bare {
        out.push_str(&f.value);
    } else {
        out.push_str(&quote(&f.value));
    }
}

fn quote(text: &str) -> String {
    let mut s = String::with_capacity(text.len() + 2);
    s.push('"');
    for c in text.chars() {
        if matches!(c, '"' | '\\') {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

/// Whether a literal can be written without quoting: it must lex back as
/// exactly itself, and any parentheses inside it must balance so that a
/// closing group parenthesis after it is not swallowed.
fn is_bare(text: &str) -> bool {
    let mut depth = 0i32;
    for c in text.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return false;
        }
    }
    if depth != 0 {
        return false;
    }
    matches!(
        parse(text),
        Ok(Query { root: Some(Node::Sequence(ref atoms)) })
            if atoms.len() == 1 && atoms[0] == PatternAtom::literal(text)
    )
}
