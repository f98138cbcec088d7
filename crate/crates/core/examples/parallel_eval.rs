//! Evaluates the same query sequentially and in parallel and compares the
//! two event streams.

use std::time::Instant;

use smartsearch::{evaluate, evaluate_parallel, Corpus, Document, EvalConfig, Event};

fn main() -> anyhow::Result<()> {
    let words = ["alpha", "beta", "gamma", "delta", "parse", "error", "test"];
    let docs = (0..400)
        .map(|i| {
            let body: Vec<String> = (0..40)
                .map(|j| format!("{} {} {}", words[(i + j) % 7], words[(i * j) % 7], words[j % 7]))
                .collect();
            Document::new("gen", format!("f{i}.py"), &body.join("\n"))
        })
        .collect();
    let corpus = Corpus::from_documents(docs);
    let query = "python error parse beta";
    let config = EvalConfig::default();

    let mut seq = String::new();
    let t = Instant::now();
    evaluate(&corpus, query, &config, &mut |e: Event| seq.push_str(&e.to_line()))?;
    let seq_time = t.elapsed();

    let mut par = String::new();
    let t = Instant::now();
    evaluate_parallel(&corpus, query, &config, &mut |e: Event| par.push_str(&e.to_line()))?;
    let par_time = t.elapsed();

    println!("sequential {seq_time:?}, parallel {par_time:?}");
    println!("{} lines, identical: {}", seq.lines().count(), seq == par);
    Ok(())
}
