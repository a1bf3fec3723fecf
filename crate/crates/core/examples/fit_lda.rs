//! Fits LDA to a pruned desk-scale corpus and prints the topics.

use topicprune::corpus::{generate_corpus, DgpConfig};
use topicprune::dtm::build_dtm;
use topicprune::lda::{fit_lda, GibbsConfig};
use topicprune::metrics::ranked_indices;
use topicprune::pruning::prune_by_relative_df;

fn main() -> topicprune::Result<()> {
    let corpus = generate_corpus(&DgpConfig::desk(3))?;
    let dtm = prune_by_relative_df(&build_dtm(&corpus.docs)?, 0.01)?;
    println!("{} documents, {} terms, {} tokens", dtm.n_docs(), dtm.n_terms(), dtm.total_tokens());

    let mut config = GibbsConfig::new(10, 1);
    config.trace_every = 50;
    let start = std::time::Instant::now();
    let model = fit_lda(&dtm, &config)?;
    println!("{} sweeps in {:.2?}", config.n_sweeps, start.elapsed());

    for (sweep, ll) in &model.log_likelihood_trace {
        println!("sweep {sweep:>4}: log p(w, z) = {ll:.1}");
    }
    let terms = model.vocab.terms();
    for (k, row) in model.phi.rows().enumerate() {
        let top: Vec<u32> = ranked_indices(row, 8).into_iter().map(|j| terms[j]).collect();
        println!("topic {k}: {top:?}");
    }
    println!("theta of document 0: {:.3?}", model.theta_hat[0]);
    Ok(())
}
