//! Parses a few queries and prints their canonical form.
//!
//!     cargo run --example parse_query -- 'lang:go "func main" OR /fn\s+\w+/'

use smartsearch::query::{parse, print};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let inputs = if args.is_empty() {
        vec![
            "jest test typescript".to_string(),
            "lang:python (parse OR tokenize) NOT test".to_string(),
            r#"repo:webapp "v1.3" AND /colou?r/"#.to_string(),
            "unbalanced (paren".to_string(),
        ]
    } else {
        args
    };
    for input in inputs {
        match parse(&input) {
            Ok(q) => println!("{input:40} => {}", print(&q)),
            Err(e) => println!("{input:40} !! {e}"),
        }
    }
}
