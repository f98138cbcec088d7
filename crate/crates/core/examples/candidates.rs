//! Lists the alternatives generated for a query, in evaluation order.

use smartsearch::generator::generate;
use smartsearch::query::parse;
use smartsearch::rules::describe;

fn main() -> anyhow::Result<()> {
    let input = std::env::args().nth(1).unwrap_or_else(|| "jest test typescript".into());
    let max = 5;
    let q = parse(&input)?;
    println!("{input} (at most {max})");
    for c in generate(&q, max) {
        println!("{:2}. {:40} {}", c.rank, c.rendered, describe(&c.applied_rules));
    }
    Ok(())
}
