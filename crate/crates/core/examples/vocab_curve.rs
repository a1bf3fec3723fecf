//! Vocabulary size against the document-frequency cut-off, without any
//! model fitting.
//!
//! ```text
//! cargo run --release --example vocab_curve [-- desk|dgp1|dgp2 [replications]]
//! ```

use topicprune::corpus::{generate_corpus, DgpConfig};
use topicprune::dtm::build_dtm;
use topicprune::experiment::summarize;
use topicprune::pruning::{prune_by_relative_df, CutoffSchedule};

fn main() -> topicprune::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "desk".into());
    let reps: u64 = args.next().map_or(3, |s| s.parse().expect("replications must be an integer"));
    let (dgp, schedule): (fn(u64) -> DgpConfig, _) = match preset.as_str() {
        "dgp1" => (DgpConfig::dgp1, CutoffSchedule::dgp1()),
        "dgp2" => (DgpConfig::dgp2, CutoffSchedule::dgp2()),
        _ => (DgpConfig::desk, CutoffSchedule::desk()),
    };

    let mut shares = vec![Vec::new(); schedule.len()];
    let mut sizes = vec![Vec::new(); schedule.len()];
    for r in 0..reps {
        let dtm = build_dtm(&generate_corpus(&dgp(r))?.docs)?;
        for (i, &c) in schedule.values().iter().enumerate() {
            let v = prune_by_relative_df(&dtm, c).map_or(0, |m| m.n_terms());
            sizes[i].push(v as f64);
            shares[i].push(1.0 - v as f64 / dtm.n_terms() as f64);
        }
    }
    println!("{preset}, {reps} corpora");
    println!("cutoff  mean size  removed");
    for (i, &c) in schedule.values().iter().enumerate() {
        let size = summarize(&sizes[i]).expect("non-empty").mean;
        let share = summarize(&shares[i]).expect("non-empty").mean;
        println!("{:>5.2}%  {:>9.1}  {:>6.1}%", c * 100.0, size, share * 100.0);
    }
    Ok(())
}
