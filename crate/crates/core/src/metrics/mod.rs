//! Evaluation of estimated topics against the ground truth and on their own.

mod coherence;
mod matching;
mod similarity;

pub use coherence::{cao_topic_similarity, umass_coherence, umass_per_topic};
pub use matching::{
    align_union, best_matching, distance_matrix, hungarian, model_fit, pairwise_scores,
    AlignedTopicPairSpace, Assignment, FitDistance, MatchPair, MatchResult, TopicMetric,
};
pub use similarity::{cosine_similarity, jensen_shannon_distance, ranked_indices, rbo};

use serde::{Deserialize, Serialize};

use crate::corpus::TopicWordMatrix;
use crate::dtm::DocumentTermMatrix;
use crate::error::Result;
use crate::lda::EstimatedModel;

/// Cut-offs and parameters of every metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub cosine_cutoff: f64,
    pub js_cutoff: f64,
    pub rbo_cutoff: f64,
    pub rbo_p: f64,
    pub rbo_depth: usize,
    pub coherence_top_m: usize,
    pub fit_distance: FitDistance,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            cosine_cutoff: 0.8,
            js_cutoff: 0.2,
            rbo_cutoff: 0.8,
            rbo_p: 0.9,
            rbo_depth: 20,
            coherence_top_m: 10,
            fit_distance: FitDistance::JensenShannon,
        }
    }
}

impl EvalConfig {
    pub fn rbo_metric(&self) -> TopicMetric {
        TopicMetric::Rbo {
            p: self.rbo_p,
            depth: self.rbo_depth,
        }
    }
}

/// All metric values for one fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    /// Mean matched distance under one-to-one matching (lower is better).
    pub model_fit: f64,
    /// Mean pairwise cosine between estimated topics (lower is better).
    pub cao_similarity: f64,
    /// Mean UMass coherence (higher is better).
    pub coherence: f64,
    pub recall_cosine: f64,
    pub recall_js: f64,
    pub recall_rbo: f64,
}

impl EvaluationRecord {
    pub const METRICS: [&'static str; 6] = [
        "model_fit",
        "cao_similarity",
        "coherence",
        "recall_cosine",
        "recall_js",
        "recall_rbo",
    ];

    /// `(name, value)` pairs in [`Self::METRICS`] order.
    pub fn values(&self) -> [(&'static str, f64); 6] {
        [
            ("model_fit", self.model_fit),
            ("cao_similarity", self.cao_similarity),
            ("coherence", self.coherence),
            ("recall_cosine", self.recall_cosine),
            ("recall_js", self.recall_js),
            ("recall_rbo", self.recall_rbo),
        ]
    }
}

/// Truth-based part of an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicComparison {
    pub model_fit: f64,
    pub fit_assignment: Assignment,
    /// Distance of every pair of `fit_assignment`.
    pub fit_distances: Vec<f64>,
    pub cosine: (MatchResult, f64),
    pub js: (MatchResult, f64),
    pub rbo: (MatchResult, f64),
}

impl TopicComparison {
    pub fn recalls(&self) -> [f64; 3] {
        [self.cosine.1, self.js.1, self.rbo.1]
    }
}

/// Compares estimated topics with true topics: best-matching recall for
/// cosine, JS distance and RBO, plus one-to-one model fit.
pub fn compare_topics(
    truth: &TopicWordMatrix,
    true_terms: &[u32],
    est: &TopicWordMatrix,
    est_terms: &[u32],
    config: &EvalConfig,
) -> Result<TopicComparison> {
    let space = align_union(truth, true_terms, est, est_terms)?;
    let cos_scores = pairwise_scores(&space, TopicMetric::Cosine)?;
    let js_scores = pairwise_scores(&space, TopicMetric::JensenShannon)?;
    let rbo_metric = config.rbo_metric();
    let cosine = matching::best_matching_from_scores(&cos_scores, space.n_true(), TopicMetric::Cosine, config.cosine_cutoff);
    let js = matching::best_matching_from_scores(&js_scores, space.n_true(), TopicMetric::JensenShannon, config.js_cutoff);
    let rbo = best_matching(&space, rbo_metric, config.rbo_cutoff)?;

    let costs = match config.fit_distance {
        FitDistance::JensenShannon => js_scores,
        FitDistance::Cosine => cos_scores
            .into_iter()
            .map(|r| r.into_iter().map(|s| 1.0 - s).collect())
            .collect(),
    };
    let (model_fit, fit_assignment) = matching::model_fit_from_costs(&costs)?;
    let fit_distances = fit_assignment.pairs.iter().map(|&(e, t)| costs[e][t]).collect();
    Ok(TopicComparison {
        model_fit,
        fit_assignment,
        fit_distances,
        cosine,
        js,
        rbo,
    })
}

/// Full evaluation of one fitted model against the true topic-word matrix.
///
/// `truth` columns are term ids `0..V`; `dtm` is the matrix the model was
/// fit on (used for coherence).
pub fn evaluate(
    truth: &TopicWordMatrix,
    model: &EstimatedModel,
    dtm: &DocumentTermMatrix,
    config: &EvalConfig,
) -> Result<(EvaluationRecord, TopicComparison)> {
    let true_terms: Vec<u32> = (0..truth.n_terms() as u32).collect();
    let cmp = compare_topics(truth, &true_terms, &model.phi, model.vocab.terms(), config)?;
    let record = EvaluationRecord {
        model_fit: cmp.model_fit,
        cao_similarity: cao_topic_similarity(&model.phi)?,
        coherence: umass_coherence(model, dtm, config.coherence_top_m)?,
        recall_cosine: cmp.cosine.1,
        recall_js: cmp.js.1,
        recall_rbo: cmp.rbo.1,
    };
    Ok((record, cmp))
}
