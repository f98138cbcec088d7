//! Shows how many documents the trigram prefilter keeps for a few queries.

use smartsearch::query::parse;
use smartsearch::{Corpus, Document};

fn main() -> anyhow::Result<()> {
    let corpus = Corpus::from_documents(vec![
        Document::new("r", "a.rs", "fn parse_config() {}\nlet x = 1;"),
        Document::new("r", "b.go", "func parse(s string) error"),
        Document::new("r", "c.py", "def tokenize(text):\n    pass"),
        Document::new("r", "d.md", "Parsing notes"),
    ]);
    println!("{} documents, {} distinct trigrams", corpus.len(), corpus.trigrams().len());
    for input in ["parse", "tokenize", "/pars(e|ing)/", "fn OR func", "zzz"] {
        let q = parse(input)?;
        let kept: Vec<String> = corpus
            .prefilter_candidates(&q)
            .into_iter()
            .map(|id| corpus.document(id).path.clone())
            .collect();
        let mut hits = 0;
        corpus.search(&q, usize::MAX, &mut |_| hits += 1)?;
        println!("{input:16} prefilter {kept:?}, {hits} matching lines");
    }
    Ok(())
}
