//! Query language: syntax tree, parser and canonical printer.

mod ast;
mod parse;
mod print;

pub use ast::{AtomKind, Filter, FilterField, Node, PatternAtom, Query};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use print::{print, render_atom};

pub use crate::pattern::count_metasyntax;
