//! Applies the three pruning criteria at matched vocabulary sizes.
//!
//! The document-frequency cut-off fixes a vocabulary size; the absolute
//! count threshold closest to that size and the TF-IDF top-V list of
//! exactly that size are then compared with it.

use std::collections::BTreeSet;

use topicprune::corpus::{generate_corpus, DgpConfig};
use topicprune::dtm::{build_dtm, DocumentTermMatrix};
use topicprune::pruning::{
    match_tf_threshold, prune_by_absolute_tf, prune_by_relative_df, prune_by_tfidf_topv, CutoffSchedule,
};

fn terms(m: &DocumentTermMatrix) -> BTreeSet<u32> {
    m.vocab().terms().iter().copied().collect()
}

fn main() -> topicprune::Result<()> {
    let corpus = generate_corpus(&DgpConfig::desk(7))?;
    let dtm = build_dtm(&corpus.docs)?;
    println!("full vocabulary: {} terms", dtm.n_terms());
    println!("cutoff   docfreq  termfreq(min)    tfidf  overlap(tf)  overlap(tfidf)");
    for &cutoff in CutoffSchedule::desk().values().iter().step_by(4) {
        let by_df = prune_by_relative_df(&dtm, cutoff)?;
        let target = by_df.n_terms();
        let min_count = match_tf_threshold(&dtm, target);
        let by_tf = prune_by_absolute_tf(&dtm, min_count)?;
        let by_tfidf = prune_by_tfidf_topv(&dtm, target)?;
        let df_terms = terms(&by_df);
        println!(
            "{:>5.1}%  {:>8}  {:>8}({:>3})  {:>8}  {:>11}  {:>14}",
            cutoff * 100.0,
            target,
            by_tf.n_terms(),
            min_count,
            by_tfidf.n_terms(),
            df_terms.intersection(&terms(&by_tf)).count(),
            df_terms.intersection(&terms(&by_tfidf)).count(),
        );
    }
    Ok(())
}
