//! Topic quality scores that need no ground truth.

use super::similarity::{cosine_with_norms, norm, ranked_indices};
use crate::corpus::TopicWordMatrix;
use crate::dtm::DocumentTermMatrix;
use crate::error::{Error, Result};
use crate::lda::EstimatedModel;

/// Mean UMass coherence over all topics of `model`.
///
/// For the top-`top_m` terms `v_1..v_M` of a topic (by probability, ties to
/// the lower term id):
///
/// ```text
/// C = sum_{m=2..M} sum_{l=1..m-1} ln((D(v_m, v_l) + 1) / D(v_l))
/// ```
///
/// with `D` counting the documents of `dtm` that contain all given terms.
/// `dtm` should be the matrix the model was trained on; `top_m` is capped
/// at the vocabulary size.
pub fn umass_coherence(model: &EstimatedModel, dtm: &DocumentTermMatrix, top_m: usize) -> Result<f64> {
    Ok(umass_per_topic(model, dtm, top_m)?.iter().sum::<f64>() / model.phi.n_topics() as f64)
}

/// UMass coherence of every topic.
pub fn umass_per_topic(model: &EstimatedModel, dtm: &DocumentTermMatrix, top_m: usize) -> Result<Vec<f64>> {
    if top_m < 2 {
        return Err(Error::invalid_parameter("coherence needs at least the top 2 terms"));
    }
    let phi = &model.phi;
    let terms = model.vocab.terms();

    // top words per topic, as dtm columns
    let top: Vec<Vec<usize>> = phi
        .rows()
        .map(|row| {
            ranked_indices(row, top_m)
                .into_iter()
                .map(|j| {
                    dtm.vocab().column_of(terms[j]).ok_or_else(|| {
                        Error::invalid_input(format!("term {} missing from the matrix", terms[j]))
                    })
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<_>>()?;

    // sorted document lists for the columns that matter
    let mut wanted = vec![false; dtm.n_terms()];
    top.iter().flatten().for_each(|&c| wanted[c] = true);
    let mut docs_of: Vec<Vec<u32>> = vec![Vec::new(); dtm.n_terms()];
    for d in 0..dtm.n_docs() {
        for (c, _) in dtm.row(d) {
            if wanted[c] {
                docs_of[c].push(d as u32);
            }
        }
    }

    top.iter()
        .map(|words| {
            let mut score = 0.0;
            for m in 1..words.len() {
                for l in 0..m {
                    let dl = docs_of[words[l]].len();
                    if dl == 0 {
                        return Err(Error::invalid_input(format!(
                            "term {} never occurs in the matrix",
                            dtm.vocab().terms()[words[l]]
                        )));
                    }
                    let joint = intersection_size(&docs_of[words[m]], &docs_of[words[l]]);
                    score += ((joint as f64 + 1.0) / dl as f64).ln();
                }
            }
            Ok(score)
        })
        .collect()
}

fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Mean cosine similarity over all unordered pairs of topics. Lower means
/// better separated topics.
pub fn cao_topic_similarity(phi: &TopicWordMatrix) -> Result<f64> {
    let k = phi.n_topics();
    if k < 2 {
        return Err(Error::invalid_parameter("topic similarity needs at least two topics"));
    }
    let norms: Vec<f64> = phi.rows().map(norm).collect();
    let mut sum = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            sum += cosine_with_norms(phi.row(a), norms[a], phi.row(b), norms[b]);
        }
    }
    Ok(sum / (k * (k - 1) / 2) as f64)
}
