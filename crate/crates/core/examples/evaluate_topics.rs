//! Scores one fitted model against the true topics.

use topicprune::corpus::{generate_corpus, DgpConfig};
use topicprune::dtm::build_dtm;
use topicprune::lda::{fit_lda, GibbsConfig};
use topicprune::metrics::{compare_topics, evaluate, EvalConfig};
use topicprune::pruning::prune_by_relative_df;

fn main() -> topicprune::Result<()> {
    let corpus = generate_corpus(&DgpConfig::desk(11))?;
    let full = build_dtm(&corpus.docs)?;
    let cfg = EvalConfig::default();
    let all_terms: Vec<u32> = (0..corpus.beta.n_terms() as u32).collect();

    // the truth matched with itself is a perfect score
    let own = compare_topics(&corpus.beta, &all_terms, &corpus.beta, &all_terms, &cfg)?;
    println!("truth vs truth: fit {} recalls {:?}", own.model_fit, own.recalls());

    for cutoff in [0.0, 0.02, 0.1] {
        let dtm = prune_by_relative_df(&full, cutoff)?;
        let model = fit_lda(&dtm, &GibbsConfig::new(10, 5))?;
        let (record, cmp) = evaluate(&corpus.beta, &model, &dtm, &cfg)?;
        println!("\ncut-off {:.1}% ({} terms)", cutoff * 100.0, dtm.n_terms());
        println!("{}", serde_json::to_string_pretty(&record).expect("record serializes"));
        let pairs: Vec<String> = cmp
            .js
            .0
            .pairs
            .iter()
            .map(|p| format!("{}->{} ({:.3})", p.est_topic, p.true_topic, p.score))
            .collect();
        println!("JS best matches: {}", pairs.join(", "));
    }
    Ok(())
}
