//! Applies each rewrite rule to a query where it fits.

use smartsearch::query::{parse, print};
use smartsearch::rules::{applicable, apply, RuleId};

fn main() -> anyhow::Result<()> {
    let rules = [RuleId::Language, RuleId::Regex, RuleId::Unquote, RuleId::And];
    for input in ["python parse_args", "func.*parse", "\"v1.3\"", "func parse", "hello"] {
        let q = parse(input)?;
        println!("{input}");
        for rule in rules {
            if applicable(rule, &q) {
                println!("  {:8} {}", rule.as_str(), print(&apply(rule, &q)?));
            }
        }
    }
    Ok(())
}
