//! Runs the full flow against a small in-memory corpus and prints the
//! event stream as NDJSON.

use smartsearch::{evaluate, Corpus, Document, EvalConfig, Event};

fn main() -> anyhow::Result<()> {
    let corpus = Corpus::from_documents(vec![
        Document::new("webapp", "src/math.test.ts", "import { add } from './math';\n// a small jest test\ntest('adds', () => {});"),
        Document::new("webapp", "jest.config.js", "module.exports = { preset: 'ts-jest' };"),
        Document::new("toolkit", "parse.py", "def parse_args(argv):\n    return argv"),
    ]);
    let query = std::env::args().nth(1).unwrap_or_else(|| "jest test typescript".into());
    let config = EvalConfig {
        display_limit: 20,
        ..EvalConfig::default()
    };
    let outcome = evaluate(&corpus, &query, &config, &mut |e: Event| print!("{}", e.to_line()))?;
    eprintln!(
        "triggered={} original={} streamed={}",
        outcome.triggered, outcome.original_count, outcome.total_streamed
    );
    Ok(())
}
