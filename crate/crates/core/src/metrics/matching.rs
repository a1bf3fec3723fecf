//! Matching estimated topics to true topics.
//!
//! Both sides are first laid out over the union of their vocabularies, a
//! term missing on one side getting probability zero there. Best matching
//! then pairs every estimated topic with its closest true topic and counts
//! the distinct true topics reached by a pair that clears a cut-off
//! (recall). One-to-one matching solves the assignment problem on the
//! pairwise distance matrix and reports the mean matched distance (model
//! fit).

use serde::{Deserialize, Serialize};

use super::similarity::{cosine_with_norms, js_distance_unchecked, norm, ranked_indices, rbo_unchecked};
use crate::corpus::TopicWordMatrix;
use crate::error::{Error, Result};

/// True and estimated topics over a shared, ascending list of term ids.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTopicPairSpace {
    union_terms: Vec<u32>,
    true_topics: Vec<f64>,
    est_topics: Vec<f64>,
    n_true: usize,
    n_est: usize,
}

impl AlignedTopicPairSpace {
    pub fn union_terms(&self) -> &[u32] {
        &self.union_terms
    }

    pub fn n_true(&self) -> usize {
        self.n_true
    }

    pub fn n_est(&self) -> usize {
        self.n_est
    }

    pub fn true_row(&self, k: usize) -> &[f64] {
        let u = self.union_terms.len();
        &self.true_topics[k * u..(k + 1) * u]
    }

    pub fn est_row(&self, k: usize) -> &[f64] {
        let u = self.union_terms.len();
        &self.est_topics[k * u..(k + 1) * u]
    }
}

/// Lays out both topic sets over the union of `true_terms` and `est_terms`.
///
/// `true_terms[j]` / `est_terms[j]` give the term id of column `j` of the
/// corresponding matrix; both lists must be strictly ascending. Missing
/// terms are filled with exact zeros and nothing is renormalized.
pub fn align_union(
    truth: &TopicWordMatrix,
    true_terms: &[u32],
    est: &TopicWordMatrix,
    est_terms: &[u32],
) -> Result<AlignedTopicPairSpace> {
    if truth.n_terms() != true_terms.len() || est.n_terms() != est_terms.len() {
        return Err(Error::invalid_input("term list does not match matrix width"));
    }
    for terms in [true_terms, est_terms] {
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid_input("term lists must be strictly ascending"));
        }
    }
    let mut union_terms: Vec<u32> = true_terms.iter().chain(est_terms).copied().collect();
    union_terms.sort_unstable();
    union_terms.dedup();
    let u = union_terms.len();

    let spread = |m: &TopicWordMatrix, terms: &[u32]| -> Vec<f64> {
        let cols: Vec<usize> = terms
            .iter()
            .map(|t| union_terms.binary_search(t).expect("term is in the union"))
            .collect();
        let mut out = vec![0.0; m.n_topics() * u];
        for (k, row) in m.rows().enumerate() {
            for (&c, &x) in cols.iter().zip(row) {
                out[k * u + c] = x;
            }
        }
        out
    };
    let true_topics = spread(truth, true_terms);
    let est_topics = spread(est, est_terms);
    Ok(AlignedTopicPairSpace {
        n_true: truth.n_topics(),
        n_est: est.n_topics(),
        union_terms,
        true_topics,
        est_topics,
    })
}

/// Measure used to compare an estimated topic with a true topic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopicMetric {
    Cosine,
    JensenShannon,
    /// Rank-biased overlap of the top-`depth` term rankings.
    Rbo { p: f64, depth: usize },
}

impl TopicMetric {
    pub const DEFAULT_RBO: TopicMetric = TopicMetric::Rbo { p: 0.9, depth: 20 };

    /// True when larger values mean closer topics.
    pub fn is_similarity(&self) -> bool {
        !matches!(self, TopicMetric::JensenShannon)
    }

    /// 0.8 for the similarities, 0.2 for the JS distance.
    pub fn default_cutoff(&self) -> f64 {
        if self.is_similarity() {
            0.8
        } else {
            0.2
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TopicMetric::Cosine => "cosine",
            TopicMetric::JensenShannon => "js",
            TopicMetric::Rbo { .. } => "rbo",
        }
    }

    fn validate(&self) -> Result<()> {
        if let TopicMetric::Rbo { p, depth } = *self {
            if !(p > 0.0 && p < 1.0) || depth == 0 {
                return Err(Error::invalid_parameter(format!(
                    "RBO needs 0 < p < 1 and depth >= 1, got p={p}, depth={depth}"
                )));
            }
        }
        Ok(())
    }
}

/// `scores[e][t]`: metric between estimated topic `e` and true topic `t`.
pub fn pairwise_scores(space: &AlignedTopicPairSpace, metric: TopicMetric) -> Result<Vec<Vec<f64>>> {
    metric.validate()?;
    let est = 0..space.n_est();
    let tru = 0..space.n_true();
    Ok(match metric {
        TopicMetric::Cosine => {
            let en: Vec<f64> = est.clone().map(|e| norm(space.est_row(e))).collect();
            let tn: Vec<f64> = tru.clone().map(|t| norm(space.true_row(t))).collect();
            est.map(|e| {
                tru.clone()
                    .map(|t| cosine_with_norms(space.est_row(e), en[e], space.true_row(t), tn[t]))
                    .collect()
            })
            .collect()
        }
        TopicMetric::JensenShannon => est
            .map(|e| {
                tru.clone()
                    .map(|t| js_distance_unchecked(space.est_row(e), space.true_row(t)))
                    .collect()
            })
            .collect(),
        TopicMetric::Rbo { p, depth } => {
            let er: Vec<Vec<usize>> = est.clone().map(|e| ranked_indices(space.est_row(e), depth)).collect();
            let tr: Vec<Vec<usize>> = tru.clone().map(|t| ranked_indices(space.true_row(t), depth)).collect();
            est.map(|e| tr.iter().map(|t| rbo_unchecked(&er[e], t, p, depth)).collect())
                .collect()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub est_topic: usize,
    pub true_topic: usize,
    pub score: f64,
    /// Whether the pair clears the cut-off.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchPair>,
    pub metric: TopicMetric,
    pub cutoff: f64,
}

/// Pairs every estimated topic with its best true topic (ties go to the
/// lower true index) and returns the share of true topics reached by at
/// least one accepted pair.
///
/// Several estimated topics may pick the same true topic; it is counted
/// once.
pub fn best_matching(
    space: &AlignedTopicPairSpace,
    metric: TopicMetric,
    cutoff: f64,
) -> Result<(MatchResult, f64)> {
    let scores = pairwise_scores(space, metric)?;
    Ok(best_matching_from_scores(&scores, space.n_true(), metric, cutoff))
}

pub(crate) fn best_matching_from_scores(
    scores: &[Vec<f64>],
    n_true: usize,
    metric: TopicMetric,
    cutoff: f64,
) -> (MatchResult, f64) {
    let similarity = metric.is_similarity();
    let mut reached = vec![false; n_true];
    let pairs = scores
        .iter()
        .enumerate()
        .map(|(e, row)| {
            let mut best = 0;
            for t in 1..row.len() {
                let better = if similarity { row[t] > row[best] } else { row[t] < row[best] };
                if better {
                    best = t;
                }
            }
            let score = row[best];
            let accepted = if similarity { score >= cutoff } else { score <= cutoff };
            if accepted {
                reached[best] = true;
            }
            MatchPair {
                est_topic: e,
                true_topic: best,
                score,
                accepted,
            }
        })
        .collect();
    let recall = reached.iter().filter(|&&r| r).count() as f64 / n_true as f64;
    (MatchResult { pairs, metric, cutoff }, recall)
}

/// Minimum-cost assignment between the rows and columns of a cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, column)` pairs, rows ascending; `min(n, m)` of them.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// Hungarian algorithm (shortest augmenting paths with potentials),
/// O(n^2 m) for an n x m matrix with n <= m.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Assignment> {
    let n = cost.len();
    let m = cost.first().map_or(0, Vec::len);
    if cost.iter().any(|r| r.len() != m) {
        return Err(Error::invalid_input("ragged cost matrix"));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::invalid_input("cost matrix must be finite"));
    }
    if n == 0 || m == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total_cost: 0.0,
        });
    }
    let pairs = if n <= m {
        solve_rows_le_cols(cost)
    } else {
        let transposed: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| cost[i][j]).collect()).collect();
        let mut p: Vec<(usize, usize)> =
            solve_rows_le_cols(&transposed).into_iter().map(|(j, i)| (i, j)).collect();
        p.sort_unstable();
        p
    };
    let total_cost = pairs.iter().map(|&(i, j)| cost[i][j]).sum();
    Ok(Assignment { pairs, total_cost })
}

fn solve_rows_le_cols(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = cost.len();
    let m = cost[0].len();
    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| owner[j] > 0)
        .map(|j| (owner[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Distance used for one-to-one matching.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitDistance {
    #[default]
    JensenShannon,
    /// `1 - cosine similarity`.
    Cosine,
}

/// Pairwise distance matrix `[est][true]` for one-to-one matching.
pub fn distance_matrix(space: &AlignedTopicPairSpace, distance: FitDistance) -> Result<Vec<Vec<f64>>> {
    Ok(match distance {
        FitDistance::JensenShannon => pairwise_scores(space, TopicMetric::JensenShannon)?,
        FitDistance::Cosine => pairwise_scores(space, TopicMetric::Cosine)?
            .into_iter()
            .map(|row| row.into_iter().map(|s| 1.0 - s).collect())
            .collect(),
    })
}

/// Mean distance over the optimal one-to-one matching.
pub fn model_fit(space: &AlignedTopicPairSpace, distance: FitDistance) -> Result<f64> {
    let costs = distance_matrix(space, distance)?;
    model_fit_from_costs(&costs).map(|(fit, _)| fit)
}

pub(crate) fn model_fit_from_costs(costs: &[Vec<f64>]) -> Result<(f64, Assignment)> {
    let a = hungarian(costs)?;
    let fit = if a.pairs.is_empty() {
        0.0
    } else {
        a.total_cost / a.pairs.len() as f64
    };
    Ok((fit, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use rand::Rng;

    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        // rows <= cols assumed; try every injective map rows -> cols
        fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + go(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        if cost.len() <= cost[0].len() {
            go(cost, 0, &mut vec![false; cost[0].len()])
        } else {
            let t: Vec<Vec<f64>> = (0..cost[0].len())
                .map(|j| cost.iter().map(|r| r[j]).collect())
                .collect();
            go(&t, 0, &mut vec![false; cost.len()])
        }
    }

    #[test]
    fn identity_favoring_costs() {
        let a = hungarian(&[vec![0.0, 9.0], vec![9.0, 0.0]]).unwrap();
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn all_equal_costs() {
        let c = vec![vec![2.5; 4]; 4];
        let a = hungarian(&c).unwrap();
        assert_eq!(a.pairs.len(), 4);
        assert_eq!(a.total_cost, 10.0);
    }

    #[test]
    fn random_square_matrices_match_permutation_search() {
        let mut rng = stream_rng(42, 0);
        for _ in 0..50 {
            let c: Vec<Vec<f64>> = (0..5).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
            let a = hungarian(&c).unwrap();
            assert!((a.total_cost - brute_force_min(&c)).abs() < 1e-12);
            let mut cols: Vec<usize> = a.pairs.iter().map(|p| p.1).collect();
            cols.sort_unstable();
            assert_eq!(cols, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn rectangular_matrices() {
        let mut rng = stream_rng(43, 0);
        for (n, m) in [(2, 5), (5, 2), (3, 4), (6, 3), (1, 6)] {
            let c: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect();
            let a = hungarian(&c).unwrap();
            assert_eq!(a.pairs.len(), n.min(m));
            assert!((a.total_cost - brute_force_min(&c)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_costs_rejected() {
        assert!(hungarian(&[vec![f64::NAN]]).is_err());
    }

    fn beta(rows: Vec<Vec<f64>>) -> TopicWordMatrix {
        TopicWordMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn alignment_pads_with_zeros() {
        let truth = beta(vec![vec![0.5, 0.25, 0.25], vec![0.1, 0.1, 0.8]]);
        let est = beta(vec![vec![0.6, 0.4]]);
        let space = align_union(&truth, &[0, 1, 2], &est, &[0, 2]).unwrap();
        assert_eq!(space.union_terms(), &[0, 1, 2]);
        assert_eq!(space.est_row(0), &[0.6, 0.0, 0.4]);
        assert_eq!(space.true_row(1), truth.row(1));
        assert!((space.est_row(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);

        let same = align_union(&truth, &[0, 1, 2], &truth, &[0, 1, 2]).unwrap();
        for k in 0..2 {
            assert_eq!(same.true_row(k), same.est_row(k));
        }
    }

    #[test]
    fn alignment_with_terms_on_both_sides() {
        let a = beta(vec![vec![0.5, 0.5]]);
        let b = beta(vec![vec![0.25, 0.75]]);
        let space = align_union(&a, &[1, 4], &b, &[2, 4]).unwrap();
        assert_eq!(space.union_terms(), &[1, 2, 4]);
        assert_eq!(space.true_row(0), &[0.5, 0.0, 0.5]);
        assert_eq!(space.est_row(0), &[0.0, 0.25, 0.75]);
    }

    #[test]
    fn self_match_is_perfect() {
        let truth = beta(vec![vec![0.7, 0.2, 0.1, 0.0], vec![0.0, 0.1, 0.2, 0.7], vec![0.1, 0.4, 0.4, 0.1]]);
        let terms = [0, 1, 2, 3];
        let space = align_union(&truth, &terms, &truth, &terms).unwrap();
        for metric in [TopicMetric::Cosine, TopicMetric::JensenShannon, TopicMetric::DEFAULT_RBO] {
            let (m, recall) = best_matching(&space, metric, metric.default_cutoff()).unwrap();
            assert_eq!(recall, 1.0, "{metric:?}");
            assert_eq!(m.pairs.len(), 3);
        }
        assert_eq!(model_fit(&space, FitDistance::JensenShannon).unwrap(), 0.0);
        assert!(model_fit(&space, FitDistance::Cosine).unwrap().abs() < 1e-15);
    }

    #[test]
    fn uniform_estimates_recall_nothing() {
        let v = 1000;
        let truth: Vec<Vec<f64>> = (0..5)
            .map(|k| {
                let mut r = vec![0.0; v];
                for j in 0..4 {
                    r[k * 4 + j] = 0.25;
                }
                r
            })
            .collect();
        let truth = beta(truth);
        let est = beta(vec![vec![1.0 / v as f64; v]; 5]);
        let terms: Vec<u32> = (0..v as u32).collect();
        let space = align_union(&truth, &terms, &est, &terms).unwrap();
        // cosine of uniform over 1000 with uniform over 4 is sqrt(4/1000)
        let (m, recall) = best_matching(&space, TopicMetric::Cosine, 0.8).unwrap();
        assert_eq!(recall, 0.0);
        assert!((m.pairs[0].score - (4.0f64 / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn duplicate_matches_count_once() {
        let scores = vec![vec![0.9, 0.1], vec![0.95, 0.2]];
        let (m, recall) = best_matching_from_scores(&scores, 2, TopicMetric::Cosine, 0.8);
        assert_eq!(recall, 0.5);
        assert!(m.pairs.iter().all(|p| p.true_topic == 0 && p.accepted));
    }

    #[test]
    fn distance_cutoff_direction() {
        let scores = vec![vec![0.15, 0.5], vec![0.6, 0.25]];
        let (_, recall) = best_matching_from_scores(&scores, 2, TopicMetric::JensenShannon, 0.2);
        assert_eq!(recall, 0.5);
        let (_, recall) = best_matching_from_scores(&scores, 2, TopicMetric::JensenShannon, 0.25);
        assert_eq!(recall, 1.0);
    }

    #[test]
    fn fit_is_label_free() {
        let truth = beta(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.1, 0.8], vec![0.3, 0.4, 0.3]]);
        let est = beta(vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.2, 0.6], vec![0.3, 0.3, 0.4]]);
        let terms = [0, 1, 2];
        let base = model_fit(&align_union(&truth, &terms, &est, &terms).unwrap(), FitDistance::JensenShannon).unwrap();
        for order in [[2, 0, 1], [1, 2, 0], [0, 2, 1]] {
            let perm = est.permute_rows(&order);
            let fit = model_fit(&align_union(&truth, &terms, &perm, &terms).unwrap(), FitDistance::JensenShannon).unwrap();
            assert!((fit - base).abs() < 1e-12);
            let tperm = truth.permute_rows(&order);
            let fit = model_fit(&align_union(&tperm, &terms, &est, &terms).unwrap(), FitDistance::JensenShannon).unwrap();
            assert!((fit - base).abs() < 1e-12);
        }
    }
}
