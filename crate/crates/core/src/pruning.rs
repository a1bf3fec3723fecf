//! Infrequent-term removal.
//!
//! Three criteria are supported: a relative document-frequency cut-off, an
//! absolute corpus-frequency cut-off, and keeping the top-V terms by
//! TF-IDF. The latter two are made comparable to the first by targeting the
//! vocabulary size a document-frequency cut-off produces, see
//! [`match_tf_threshold`] and [`prune_by_tfidf_topv`].
//!
//! Throughout, a term survives when its statistic is at least the
//! threshold, and ties are broken toward the lower term id.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dtm::DocumentTermMatrix;
use crate::error::{Error, Result};

/// Pruning criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    /// Relative document frequency.
    #[serde(rename = "docfreq")]
    DocFreq,
    /// Absolute corpus (term) frequency.
    #[serde(rename = "termfreq")]
    TermFreq,
    /// Top-V by aggregated TF-IDF.
    #[serde(rename = "tfidf")]
    Tfidf,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::DocFreq, Criterion::TermFreq, Criterion::Tfidf];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::DocFreq => "docfreq",
            Criterion::TermFreq => "termfreq",
            Criterion::Tfidf => "tfidf",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid_parameter(format!("unknown criterion {s:?}")))
    }
}

/// How per-document TF-IDF values are folded into one score per term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TfidfAggregate {
    /// Sum over documents.
    #[default]
    Sum,
    /// Maximum over documents.
    Max,
}

/// A single pruning rule with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruningRule {
    /// Keep terms with `df / n_docs >= cutoff`.
    RelativeDocFreq(f64),
    /// Keep terms with `cf >= min_count`.
    AbsoluteTermFreq(u64),
    /// Keep the `v` terms with the highest TF-IDF score.
    TfidfTopV(usize),
}

impl PruningRule {
    pub fn criterion(&self) -> Criterion {
        match self {
            PruningRule::RelativeDocFreq(_) => Criterion::DocFreq,
            PruningRule::AbsoluteTermFreq(_) => Criterion::TermFreq,
            PruningRule::TfidfTopV(_) => Criterion::Tfidf,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PruningRule::RelativeDocFreq(c) if !(0.0..=1.0).contains(&c) => Err(
                Error::invalid_parameter(format!("document-frequency cut-off {c} outside [0, 1]")),
            ),
            PruningRule::AbsoluteTermFreq(0) => {
                Err(Error::invalid_parameter("minimum count must be at least 1"))
            }
            PruningRule::TfidfTopV(0) => {
                Err(Error::invalid_parameter("target vocabulary size must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, dtm: &DocumentTermMatrix) -> Result<DocumentTermMatrix> {
        self.validate()?;
        match *self {
            PruningRule::RelativeDocFreq(c) => prune_by_relative_df(dtm, c),
            PruningRule::AbsoluteTermFreq(m) => prune_by_absolute_tf(dtm, m),
            PruningRule::TfidfTopV(v) => prune_by_tfidf_topv(dtm, v),
        }
    }
}

/// Keeps terms whose share of documents is at least `cutoff`.
pub fn prune_by_relative_df(dtm: &DocumentTermMatrix, cutoff: f64) -> Result<DocumentTermMatrix> {
    PruningRule::RelativeDocFreq(cutoff).validate()?;
    let n = dtm.n_docs() as f64;
    // Cut-offs are written as exact fractions such as 3/200, so df/n and the
    // cut-off are both the correctly rounded value of the same rational
    // whenever they coincide; the boundary term is kept.
    let mask: Vec<bool> = dtm
        .vocab()
        .df()
        .iter()
        .map(|&df| f64::from(df) / n >= cutoff)
        .collect();
    dtm.restrict_columns(&mask).map_err(|_| {
        Error::EmptyVocabulary(format!("document-frequency cut-off {cutoff} removes every term"))
    })
}

/// Keeps terms that occur at least `min_count` times in the corpus.
pub fn prune_by_absolute_tf(dtm: &DocumentTermMatrix, min_count: u64) -> Result<DocumentTermMatrix> {
    PruningRule::AbsoluteTermFreq(min_count).validate()?;
    let mask: Vec<bool> = dtm.vocab().cf().iter().map(|&cf| cf >= min_count).collect();
    dtm.restrict_columns(&mask).map_err(|_| {
        Error::EmptyVocabulary(format!("minimum count {min_count} removes every term"))
    })
}

/// Summed TF-IDF score per column of `dtm`.
///
/// `tf(w, d) = count(w, d) / len(d)` and `idf(w) = ln(n_docs / df(w))`;
/// empty documents contribute nothing.
pub fn tfidf_scores(dtm: &DocumentTermMatrix) -> Vec<f64> {
    tfidf_scores_with(dtm, TfidfAggregate::Sum)
}

pub fn tfidf_scores_with(dtm: &DocumentTermMatrix, aggregate: TfidfAggregate) -> Vec<f64> {
    let mut tf = vec![0.0; dtm.n_terms()];
    for d in 0..dtm.n_docs() {
        let len = dtm.doc_len(d);
        if len == 0 {
            continue;
        }
        let len = len as f64;
        for (c, n) in dtm.row(d) {
            let x = f64::from(n) / len;
            match aggregate {
                TfidfAggregate::Sum => tf[c] += x,
                TfidfAggregate::Max => tf[c] = tf[c].max(x),
            }
        }
    }
    let n = dtm.n_docs() as f64;
    tf.iter()
        .zip(dtm.vocab().df())
        .map(|(&t, &df)| t * (n / f64::from(df)).ln())
        .collect()
}

/// Indices of the `v` largest scores, returned in ascending index order.
/// Equal scores prefer the lower index.
pub fn top_v_by_score(scores: &[f64], v: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(v);
    order.sort_unstable();
    order
}

/// Keeps the `target_v` terms with the highest summed TF-IDF score.
pub fn prune_by_tfidf_topv(dtm: &DocumentTermMatrix, target_v: usize) -> Result<DocumentTermMatrix> {
    prune_by_tfidf_topv_with(dtm, target_v, TfidfAggregate::Sum)
}

pub fn prune_by_tfidf_topv_with(
    dtm: &DocumentTermMatrix,
    target_v: usize,
    aggregate: TfidfAggregate,
) -> Result<DocumentTermMatrix> {
    if target_v == 0 || target_v > dtm.n_terms() {
        return Err(Error::invalid_parameter(format!(
            "target vocabulary size {target_v} outside [1, {}]",
            dtm.n_terms()
        )));
    }
    let scores = tfidf_scores_with(dtm, aggregate);
    let mut mask = vec![false; dtm.n_terms()];
    for c in top_v_by_score(&scores, target_v) {
        mask[c] = true;
    }
    dtm.restrict_columns(&mask)
}

/// Minimum corpus count whose retained vocabulary size is closest to
/// `target_v`.
///
/// Candidates are the distinct corpus frequencies present in `dtm`: the
/// threshold returned is always the smallest count among the terms it
/// keeps. When two sizes are equally close, the larger vocabulary (smaller
/// threshold) wins.
pub fn match_tf_threshold(dtm: &DocumentTermMatrix, target_v: usize) -> u64 {
    match_tf_threshold_counts(dtm.vocab().cf(), target_v)
}

pub(crate) fn match_tf_threshold_counts(cf: &[u64], target_v: usize) -> u64 {
    let mut sorted = cf.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut best: Option<(usize, u64)> = None;
    // Walking counts in descending order: after consuming every term with
    // count >= c, `kept` is the vocabulary size for threshold c.
    let mut i = 0;
    while i < sorted.len() {
        let c = sorted[i];
        while i < sorted.len() && sorted[i] == c {
            i += 1;
        }
        let dist = i.abs_diff(target_v);
        if best.is_none_or(|(d, _)| dist <= d) {
            best = Some((dist, c));
        }
    }
    best.map_or(1, |(_, c)| c)
}

/// Strictly increasing relative document-frequency cut-offs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CutoffSchedule {
    values: Vec<f64>,
}

impl CutoffSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_parameter("cut-off schedule is empty"));
        }
        if let Some(c) = values.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::invalid_parameter(format!("cut-off {c} outside [0, 1]")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid_parameter("cut-offs must be strictly increasing"));
        }
        Ok(CutoffSchedule { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 0% to 9.5% in steps of 0.5%: 20 cut-offs.
    pub fn dgp1() -> Self {
        let values = (0..20).map(|i| f64::from(i) / 200.0).collect();
        CutoffSchedule { values }
    }

    /// 0% to 2% in steps of 0.25%, then 2.5% to 4% in steps of 0.5%:
    /// 13 cut-offs.
    pub fn dgp2() -> Self {
        let values = (0..=8)
            .chain([10, 12, 14, 16])
            .map(|i| f64::from(i) / 400.0)
            .collect();
        CutoffSchedule { values }
    }

    /// 0% to 10% in steps of 0.5%: 21 cut-offs.
    pub fn desk() -> Self {
        let values = (0..=20).map(|i| f64::from(i) / 200.0).collect();
        CutoffSchedule { values }
    }
}

impl TryFrom<Vec<f64>> for CutoffSchedule {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        CutoffSchedule::new(values)
    }
}

impl From<CutoffSchedule> for Vec<f64> {
    fn from(s: CutoffSchedule) -> Self {
        s.values
    }
}
