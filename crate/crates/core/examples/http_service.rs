//! Starts the HTTP service on an ephemeral port, issues one search, and
//! prints the streamed frames as they arrive.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::sync::Arc;

use smartsearch::app::http::{router, AppState};
use smartsearch::corpus::IngestConfig;
use smartsearch::{Corpus, EvalConfig};

fn main() -> anyhow::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let (corpus, _) = Corpus::ingest(&root, &IngestConfig::default())?;
    let state = AppState::new(Arc::new(corpus), EvalConfig::default(), None)?;

    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    rt.spawn(async move { axum::serve(listener, router(state, None)).await });
    println!("listening on {addr}");

    let mut stream = TcpStream::connect(addr)?;
    write!(
        stream,
        "GET /api/search?q=jest%20test%20typescript&limit=5&session=session-02 HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n"
    )?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.starts_with('{') {
            println!("{line}");
        }
    }
    Ok(())
}
