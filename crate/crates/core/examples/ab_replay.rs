//! Replays a small query log through both experiment arms and prints the
//! metrics report.

use smartsearch::telemetry::{assign_variant, replay};
use smartsearch::{Corpus, Document, EvalConfig};

fn main() -> anyhow::Result<()> {
    let corpus = Corpus::from_documents(vec![
        Document::new("webapp", "src/app.test.ts", "// jest test for app\ntest('x', () => {})"),
        Document::new("toolkit", "cli.py", "def parse_args(argv):\n    return argv"),
    ]);
    let queries: String = (0..12)
        .map(|i| {
            let q = ["jest test typescript", "python parse_args", "parse_args", "nothing here"][i % 4];
            format!("{{\"session_id\":\"user-{}\",\"query\":\"{q}\"}}\n", i % 6)
        })
        .collect();
    for i in 0..6 {
        let id = format!("user-{i}");
        println!("{id} -> {:?}", assign_variant(&id));
    }
    let out = replay(&corpus, &queries, &EvalConfig::default(), None)?;
    print!("{}", out.report.to_pretty_json());
    Ok(())
}
