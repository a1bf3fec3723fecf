//! Draws a desk-scale corpus and writes it in the on-disk format.
//!
//! ```text
//! cargo run --release --example generate_corpus [-- <out_dir> [seed]]
//! ```

use std::path::PathBuf;

use topicprune::corpus::{generate_corpus, DgpConfig};
use topicprune::dtm::build_dtm;
use topicprune::io;

fn main() -> topicprune::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("topicprune_example_corpus"));
    let seed = args.next().map_or(42, |s| s.parse().expect("seed must be an integer"));

    let config = DgpConfig::desk(seed);
    let corpus = generate_corpus(&config)?;
    println!(
        "{} documents, {} tokens (expected about {}), {} of {} terms observed",
        corpus.n_docs(),
        corpus.total_tokens(),
        config.n_docs as f64 * config.xi,
        corpus.distinct_terms(),
        config.vocab_size
    );

    // the five most probable terms of the first three true topics
    for k in 0..3 {
        let top = topicprune::metrics::ranked_indices(corpus.beta.row(k), 5);
        println!("true topic {k}: terms {top:?}");
    }

    let dtm = build_dtm(&corpus.docs)?;
    io::write_corpus(&out, &corpus)?;
    io::write_dtm(&out.join(io::DTM_FILE), &dtm)?;
    println!("wrote corpus, ground truth and dtm to {}", out.display());

    let back = io::read_corpus(&out)?;
    assert_eq!(back, corpus);
    println!("read back identical corpus");
    Ok(())
}
