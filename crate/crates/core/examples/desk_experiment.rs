//! A resumable desk-scale Monte Carlo run.
//!
//! ```text
//! cargo run --release --example desk_experiment [-- <out_dir> [replications]]
//! ```
//!
//! Interrupt it and start it again: finished cells are kept.

use std::path::PathBuf;

use topicprune::experiment::{run_experiment, ExperimentConfig, RunOptions};
use topicprune::pruning::Criterion;

fn main() -> topicprune::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("topicprune_desk"));
    let mut config = ExperimentConfig::desk(2024, &out);
    config.n_replications = args.next().map_or(2, |s| s.parse().expect("replications must be an integer"));
    // two criteria keep the default run short
    config.criteria = vec![Criterion::DocFreq, Criterion::Tfidf];

    let options = RunOptions {
        resume: true,
        jobs: None,
    };
    let result = run_experiment(&config, &options, &|cell| {
        if let Some(e) = &cell.evaluation {
            println!(
                "{}: V={:>4} fit={:.4} recall cos/js/rbo = {:.1}/{:.1}/{:.1}",
                cell.key.file_name(),
                cell.vocab_size.unwrap_or(0),
                e.model_fit,
                e.recall_cosine,
                e.recall_js,
                e.recall_rbo
            );
        }
    })?;
    println!("{:?}", result.stats);

    let table = topicprune::experiment::aggregate(&result.cells);
    println!("\nmean model fit by cut-off (docfreq):");
    for row in table.series(Criterion::DocFreq, "model_fit") {
        if let Some(s) = row.summary {
            println!("{:>5.1}%  {:.4}  [{:.4}, {:.4}]", row.cutoff * 100.0, s.mean, s.q20, s.q80);
        }
    }
    println!("\ntables in {}", out.display());
    Ok(())
}
