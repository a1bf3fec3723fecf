//! Synthetic corpora drawn from the LDA generative model.
//!
//! A corpus is produced in two stages: a topic-word matrix is drawn once
//! from a symmetric Dirichlet, then every document draws its length from a
//! Poisson, its topic mixture from a second symmetric Dirichlet, and each
//! token a topic followed by a term from that topic's word distribution.
//! The full ground truth (topic-word matrix, document mixtures and token
//! assignments) is kept next to the tokens.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Gamma, Open01, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// Tolerance used for every "sums to one" check on probability vectors.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Parameters of one data-generating process.
///
/// `alpha` and `eta` default to `1 / n_topics` when omitted from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawDgpConfig")]
pub struct DgpConfig {
    pub n_docs: usize,
    /// Poisson mean of the document length, in tokens.
    pub xi: f64,
    pub vocab_size: usize,
    pub n_topics: usize,
    /// Document-topic concentration.
    pub alpha: f64,
    /// Topic-word concentration.
    pub eta: f64,
    pub seed: u64,
}

#[derive(Deserialize)]
struct RawDgpConfig {
    n_docs: usize,
    xi: f64,
    vocab_size: usize,
    n_topics: usize,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    eta: Option<f64>,
    #[serde(default)]
    seed: u64,
}

impl From<RawDgpConfig> for DgpConfig {
    fn from(raw: RawDgpConfig) -> Self {
        let k = raw.n_topics.max(1) as f64;
        DgpConfig {
            n_docs: raw.n_docs,
            xi: raw.xi,
            vocab_size: raw.vocab_size,
            n_topics: raw.n_topics,
            alpha: raw.alpha.unwrap_or(1.0 / k),
            eta: raw.eta.unwrap_or(1.0 / k),
            seed: raw.seed,
        }
    }
}

impl DgpConfig {
    /// Config with the default concentrations `alpha = eta = 1 / n_topics`.
    pub fn new(n_docs: usize, xi: f64, vocab_size: usize, n_topics: usize, seed: u64) -> Self {
        let conc = 1.0 / n_topics.max(1) as f64;
        DgpConfig {
            n_docs,
            xi,
            vocab_size,
            n_topics,
            alpha: conc,
            eta: conc,
            seed,
        }
    }

    /// Few long documents over many topics: 1,000 documents of 3,000
    /// expected words, 30,000 terms, 50 topics.
    pub fn dgp1(seed: u64) -> Self {
        DgpConfig::new(1_000, 3_000.0, 30_000, 50, seed)
    }

    /// Many short documents over few topics: 10,000 documents of 150
    /// expected words, 20,000 terms, 15 topics.
    pub fn dgp2(seed: u64) -> Self {
        DgpConfig::new(10_000, 150.0, 20_000, 15, seed)
    }

    /// Scaled-down process that a full pruning sweep with LDA fits can
    /// cover on a desktop: 300 documents of 300 expected words, 3,000
    /// terms, 10 topics.
    pub fn desk(seed: u64) -> Self {
        DgpConfig::new(300, 300.0, 3_000, 10, seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_docs == 0 {
            return Err(Error::invalid_parameter("n_docs must be at least 1"));
        }
        if self.n_topics == 0 {
            return Err(Error::invalid_parameter("n_topics must be at least 1"));
        }
        if self.vocab_size < self.n_topics {
            return Err(Error::invalid_parameter(format!(
                "vocab_size ({}) must be at least n_topics ({})",
                self.vocab_size, self.n_topics
            )));
        }
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(Error::invalid_parameter(format!("xi must be positive, got {}", self.xi)));
        }
        for (name, value) in [("alpha", self.alpha), ("eta", self.eta)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid_parameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Dense row-stochastic matrix; row `k` is the word distribution of topic `k`.
///
/// The same type carries estimated topic-word matrices, whose columns are
/// then positions in the vocabulary the model was fit on rather than raw
/// term ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicWordMatrix {
    n_topics: usize,
    n_terms: usize,
    data: Vec<f64>,
}

impl TopicWordMatrix {
    /// Builds a matrix from row-major data, checking that every row is a
    /// probability vector.
    pub fn from_flat(n_topics: usize, n_terms: usize, data: Vec<f64>) -> Result<Self> {
        if n_topics == 0 || n_terms == 0 {
            return Err(Error::invalid_input("topic-word matrix must be non-empty"));
        }
        if data.len() != n_topics * n_terms {
            return Err(Error::invalid_input(format!(
                "expected {} entries for a {n_topics}x{n_terms} matrix, got {}",
                n_topics * n_terms,
                data.len()
            )));
        }
        let m = TopicWordMatrix {
            n_topics,
            n_terms,
            data,
        };
        for (k, row) in m.rows().enumerate() {
            check_simplex(row).map_err(|msg| Error::invalid_input(format!("row {k}: {msg}")))?;
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_topics = rows.len();
        let n_terms = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_terms) {
            return Err(Error::invalid_input("ragged topic-word rows"));
        }
        Self::from_flat(n_topics, n_terms, rows.into_iter().flatten().collect())
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_terms..(k + 1) * self.n_terms]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_terms)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Returns a copy with rows reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let data = order.iter().flat_map(|&k| self.row(k).iter().copied()).collect();
        TopicWordMatrix {
            n_topics: order.len(),
            n_terms: self.n_terms,
            data,
        }
    }
}

pub(crate) fn check_simplex(p: &[f64]) -> std::result::Result<(), String> {
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(format!("entry {x} is not a non-negative finite number"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(format!("entries sum to {sum}, not 1"));
    }
    Ok(())
}

/// One generated document with its latent variables.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDocument {
    pub tokens: Vec<u32>,
    pub theta: Vec<f64>,
    pub z: Vec<u32>,
}

/// A corpus together with the ground truth that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub config: DgpConfig,
    pub beta: TopicWordMatrix,
    pub docs: Vec<Vec<u32>>,
    pub thetas: Vec<Vec<f64>>,
    pub z: Vec<Vec<u32>>,
}

impl SyntheticCorpus {
    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// Number of distinct term ids that occur at least once.
    pub fn distinct_terms(&self) -> usize {
        let mut seen = vec![false; self.config.vocab_size];
        for &w in self.docs.iter().flatten() {
            seen[w as usize] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

/// Draws from a symmetric Dirichlet of dimension `dim`.
///
/// Implemented as `dim` independent Gamma(`concentration`, 1) draws
/// normalized by their sum. For `concentration < 1` the Gamma draws use the
/// boost identity `G(c) = G(c + 1) * U^(1/c)` evaluated in log space, since
/// direct draws underflow to zero for concentrations such as 0.02.
pub fn sample_dirichlet<R: Rng + ?Sized>(
    concentration: f64,
    dim: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(concentration.is_finite() && concentration > 0.0) {
        return Err(Error::invalid_parameter(format!(
            "Dirichlet concentration must be positive, got {concentration}"
        )));
    }
    if dim == 0 {
        return Err(Error::invalid_parameter("Dirichlet dimension must be at least 1"));
    }
    if dim == 1 {
        return Ok(vec![1.0]);
    }

    let boosted = concentration < 1.0;
    let shape = if boosted { concentration + 1.0 } else { concentration };
    let gamma = Gamma::new(shape, 1.0)
        .map_err(|e| Error::invalid_parameter(format!("gamma shape {shape}: {e}")))?;

    let mut log_draws: Vec<f64> = (0..dim)
        .map(|_| {
            let g: f64 = gamma.sample(rng);
            if boosted {
                let u: f64 = Open01.sample(rng);
                g.ln() + u.ln() / concentration
            } else {
                g.ln()
            }
        })
        .collect();

    let max = log_draws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in &mut log_draws {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in &mut log_draws {
        *x /= sum;
    }
    Ok(log_draws)
}

/// Alias tables over the rows of a topic-word matrix, for O(1) term draws.
#[derive(Debug)]
pub struct TopicWordSampler<'a> {
    beta: &'a TopicWordMatrix,
    rows: Vec<WeightedAliasIndex<f64>>,
}

impl<'a> TopicWordSampler<'a> {
    pub fn new(beta: &'a TopicWordMatrix) -> Result<Self> {
        let rows = beta
            .rows()
            .map(|row| {
                WeightedAliasIndex::new(row.to_vec())
                    .map_err(|e| Error::invalid_input(format!("topic-word row: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(TopicWordSampler { beta, rows })
    }

    pub fn beta(&self) -> &TopicWordMatrix {
        self.beta
    }

    fn sample_term<R: Rng + ?Sized>(&self, topic: usize, rng: &mut R) -> u32 {
        self.rows[topic].sample(rng) as u32
    }
}

/// Draws `len` tokens given a fixed topic mixture. Returns `(tokens, z)`.
pub(crate) fn sample_tokens<R: Rng + ?Sized>(
    sampler: &TopicWordSampler<'_>,
    theta: &[f64],
    len: usize,
    rng: &mut R,
) -> Result<(Vec<u32>, Vec<u32>)> {
    let topic_dist = WeightedAliasIndex::new(theta.to_vec())
        .map_err(|e| Error::invalid_input(format!("topic mixture: {e}")))?;
    let mut tokens = Vec::with_capacity(len);
    let mut z = Vec::with_capacity(len);
    for _ in 0..len {
        let topic = topic_dist.sample(rng);
        z.push(topic as u32);
        tokens.push(sampler.sample_term(topic, rng));
    }
    Ok((tokens, z))
}

/// Generates one document: `N ~ Poisson(xi)`, `theta ~ Dir(alpha)`, then
/// for every token a topic `z_n ~ theta` and a term `w_n ~ beta[z_n]`.
///
/// A zero-length document is a valid outcome.
pub fn generate_document<R: Rng + ?Sized>(
    sampler: &TopicWordSampler<'_>,
    alpha: f64,
    xi: f64,
    rng: &mut R,
) -> Result<GeneratedDocument> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::invalid_parameter(format!("xi must be positive, got {xi}")));
    }
    let poisson =
        Poisson::new(xi).map_err(|e| Error::invalid_parameter(format!("poisson({xi}): {e}")))?;
    let len = poisson.sample(rng) as usize;
    let theta = sample_dirichlet(alpha, sampler.beta().n_topics(), rng)?;
    let (tokens, z) = sample_tokens(sampler, &theta, len, rng)?;
    Ok(GeneratedDocument { tokens, theta, z })
}

/// Generates a full corpus from `config`.
///
/// The topic-word matrix comes from stream 0 of `config.seed` and document
/// `d` from stream `d + 1`, so the result does not depend on how documents
/// are scheduled across threads.
pub fn generate_corpus(config: &DgpConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut beta_rng = stream_rng(config.seed, 0);
    let mut data = Vec::with_capacity(config.n_topics * config.vocab_size);
    for _ in 0..config.n_topics {
        data.extend(sample_dirichlet(config.eta, config.vocab_size, &mut beta_rng)?);
    }
    let beta = TopicWordMatrix::from_flat(config.n_topics, config.vocab_size, data)?;
    let sampler = TopicWordSampler::new(&beta)?;

    let generated: Vec<GeneratedDocument> = (0..config.n_docs)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream_rng(config.seed, d as u64 + 1);
            generate_document(&sampler, config.alpha, config.xi, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut docs = Vec::with_capacity(generated.len());
    let mut thetas = Vec::with_capacity(generated.len());
    let mut z = Vec::with_capacity(generated.len());
    for doc in generated {
        docs.push(doc.tokens);
        thetas.push(doc.theta);
        z.push(doc.z);
    }
    Ok(SyntheticCorpus {
        config: config.clone(),
        beta,
        docs,
        thetas,
        z,
    })
}
