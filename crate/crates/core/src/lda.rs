//! LDA estimation by collapsed Gibbs sampling.
//!
//! The sampler integrates out the topic-word and document-topic
//! distributions and resamples one token-topic assignment at a time from
//!
//! ```text
//! p(z_i = k | z_-i, w) ∝ (n_dk + alpha) (n_kw + eta) / (n_k + V eta)
//! ```
//!
//! where all counts exclude token `i`. Point estimates are read from the
//! final state's counts (or, optionally, averaged over post-burn-in
//! sweeps).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::corpus::TopicWordMatrix;
use crate::dtm::{DocumentTermMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::seed::stream_rng;

pub const DEFAULT_BURN_IN: usize = 200;
pub const DEFAULT_SWEEPS: usize = 500;

/// Sampler settings. `alpha` and `eta` default to `1 / n_topics`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawGibbsConfig")]
pub struct GibbsConfig {
    pub n_topics: usize,
    pub alpha: f64,
    pub eta: f64,
    /// Sweeps discarded before averaging starts. Only relevant with
    /// `average_samples`.
    pub burn_in: usize,
    /// Total number of sweeps, burn-in included.
    pub n_sweeps: usize,
    pub seed: u64,
    /// Average the estimates over every post-burn-in sweep instead of
    /// reading them from the final state.
    pub average_samples: bool,
    /// Record the joint log likelihood every `trace_every` sweeps. The
    /// final sweep is always recorded.
    pub trace_every: usize,
}

#[derive(Deserialize)]
struct RawGibbsConfig {
    n_topics: usize,
    alpha: Option<f64>,
    eta: Option<f64>,
    burn_in: Option<usize>,
    n_sweeps: Option<usize>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    average_samples: bool,
    trace_every: Option<usize>,
}

impl From<RawGibbsConfig> for GibbsConfig {
    fn from(raw: RawGibbsConfig) -> Self {
        let base = GibbsConfig::new(raw.n_topics, raw.seed);
        GibbsConfig {
            alpha: raw.alpha.unwrap_or(base.alpha),
            eta: raw.eta.unwrap_or(base.eta),
            burn_in: raw.burn_in.unwrap_or(base.burn_in),
            n_sweeps: raw.n_sweeps.unwrap_or(base.n_sweeps),
            average_samples: raw.average_samples,
            trace_every: raw.trace_every.unwrap_or(base.trace_every),
            ..base
        }
    }
}

impl GibbsConfig {
    pub fn new(n_topics: usize, seed: u64) -> Self {
        let conc = 1.0 / n_topics.max(1) as f64;
        GibbsConfig {
            n_topics,
            alpha: conc,
            eta: conc,
            burn_in: DEFAULT_BURN_IN,
            n_sweeps: DEFAULT_SWEEPS,
            seed,
            average_samples: false,
            trace_every: 1,
        }
    }

    pub fn with_sweeps(mut self, burn_in: usize, n_sweeps: usize) -> Self {
        self.burn_in = burn_in;
        self.n_sweeps = n_sweeps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_topics == 0 {
            return Err(Error::invalid_parameter("n_topics must be at least 1"));
        }
        for (name, v) in [("alpha", self.alpha), ("eta", self.eta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid_parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_sweeps <= self.burn_in {
            return Err(Error::invalid_parameter(format!(
                "n_sweeps ({}) must exceed burn_in ({})",
                self.n_sweeps, self.burn_in
            )));
        }
        if self.trace_every == 0 {
            return Err(Error::invalid_parameter("trace_every must be at least 1"));
        }
        Ok(())
    }
}

/// Result of one LDA fit.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedModel {
    /// K x V' topic-word estimate; column `j` is `vocab.terms()[j]`.
    pub phi: TopicWordMatrix,
    /// D x K document-topic estimate.
    pub theta_hat: Vec<Vec<f64>>,
    pub vocab: Vocabulary,
    /// `(sweep, log p(w, z))` pairs, sweeps counted from 1.
    pub log_likelihood_trace: Vec<(usize, f64)>,
    pub config: GibbsConfig,
}

/// State of a collapsed Gibbs chain.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    n_topics: usize,
    n_terms: usize,
    alpha: f64,
    eta: f64,
    doc_ptr: Vec<usize>,
    words: Vec<u32>,
    z: Vec<u32>,
    /// D x K, row-major.
    n_dk: Vec<u32>,
    /// V x K, term-major so one token touches a contiguous slice.
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
    sweeps: usize,
    rng: ChaCha8Rng,
    lgamma_eta: Vec<f64>,
    lgamma_alpha: Vec<f64>,
}

impl GibbsSampler {
    /// Builds the chain with topics assigned uniformly at random.
    pub fn new(dtm: &DocumentTermMatrix, config: &GibbsConfig) -> Result<Self> {
        config.validate()?;
        if dtm.n_terms() == 0 {
            return Err(Error::EmptyVocabulary("cannot fit LDA without terms".to_string()));
        }
        let k = config.n_topics;
        let v = dtm.n_terms();
        let d = dtm.n_docs();
        let mut rng = stream_rng(config.seed, 0);

        let mut doc_ptr = Vec::with_capacity(d + 1);
        let mut words = Vec::with_capacity(dtm.total_tokens() as usize);
        doc_ptr.push(0);
        for doc in 0..d {
            for (c, n) in dtm.row(doc) {
                words.extend(std::iter::repeat_n(c as u32, n as usize));
            }
            doc_ptr.push(words.len());
        }

        let mut z = Vec::with_capacity(words.len());
        let mut n_dk = vec![0u32; d * k];
        let mut n_kw = vec![0u32; v * k];
        let mut n_k = vec![0u32; k];
        for doc in 0..d {
            for &w in &words[doc_ptr[doc]..doc_ptr[doc + 1]] {
                let t = rng.random_range(0..k);
                z.push(t as u32);
                n_dk[doc * k + t] += 1;
                n_kw[w as usize * k + t] += 1;
                n_k[t] += 1;
            }
        }

        let max_cf = dtm.vocab().cf().iter().copied().max().unwrap_or(0) as usize;
        let max_len = (0..d).map(|i| doc_ptr[i + 1] - doc_ptr[i]).max().unwrap_or(0);
        let lgamma_eta = (0..=max_cf).map(|n| ln_gamma(n as f64 + config.eta)).collect();
        let lgamma_alpha = (0..=max_len).map(|n| ln_gamma(n as f64 + config.alpha)).collect();

        Ok(GibbsSampler {
            n_topics: k,
            n_terms: v,
            alpha: config.alpha,
            eta: config.eta,
            doc_ptr,
            words,
            z,
            n_dk,
            n_kw,
            n_k,
            sweeps: 0,
            rng,
            lgamma_eta,
            lgamma_alpha,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ptr.len() - 1
    }

    pub fn n_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps
    }

    /// Current topic assignment of every token, documents in order.
    pub fn assignments(&self) -> &[u32] {
        &self.z
    }

    /// Resamples every token once, documents and tokens in order.
    pub fn sweep(&mut self) {
        let k = self.n_topics;
        let v_eta = self.n_terms as f64 * self.eta;
        let mut inv_denom: Vec<f64> = self.n_k.iter().map(|&n| 1.0 / (f64::from(n) + v_eta)).collect();
        let mut weights = vec![0.0f64; k];

        for d in 0..self.n_docs() {
            let ndk = &mut self.n_dk[d * k..(d + 1) * k];
            for i in self.doc_ptr[d]..self.doc_ptr[d + 1] {
                let w = self.words[i] as usize;
                let old = self.z[i] as usize;
                let nkw = &mut self.n_kw[w * k..(w + 1) * k];

                ndk[old] -= 1;
                nkw[old] -= 1;
                self.n_k[old] -= 1;
                inv_denom[old] = 1.0 / (f64::from(self.n_k[old]) + v_eta);

                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(ndk[t]) + self.alpha)
                        * (f64::from(nkw[t]) + self.eta)
                        * inv_denom[t];
                    weights[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                ndk[new] += 1;
                nkw[new] += 1;
                self.n_k[new] += 1;
                inv_denom[new] = 1.0 / (f64::from(self.n_k[new]) + v_eta);
                self.z[i] = new as u32;
            }
        }
        self.sweeps += 1;
    }

    /// Collapsed joint log likelihood `log p(w, z | alpha, eta)`.
    ///
    /// Sum of the Dirichlet-multinomial marginals of the topic-word counts
    /// and of the document-topic counts.
    pub fn joint_log_likelihood(&self) -> f64 {
        let k = self.n_topics as f64;
        let v = self.n_terms as f64;

        // log p(w | z): zero counts contribute lgamma(eta) - lgamma(eta) = 0
        let lg_eta = self.lgamma_eta[0];
        let mut words = k * (ln_gamma(v * self.eta) - v * lg_eta);
        for &n in &self.n_kw {
            if n > 0 {
                words += self.lgamma_eta[n as usize] - lg_eta;
            }
        }
        for &n in &self.n_k {
            words -= ln_gamma(f64::from(n) + v * self.eta);
        }

        // log p(z)
        let lg_alpha = self.lgamma_alpha[0];
        let d = self.n_docs() as f64;
        let mut topics = d * (ln_gamma(k * self.alpha) - k * lg_alpha);
        for doc in 0..self.n_docs() {
            let len = self.doc_ptr[doc + 1] - self.doc_ptr[doc];
            for &n in &self.n_dk[doc * self.n_topics..(doc + 1) * self.n_topics] {
                if n > 0 {
                    topics += self.lgamma_alpha[n as usize] - lg_alpha;
                }
            }
            topics -= ln_gamma(len as f64 + k * self.alpha);
        }
        words + topics
    }

    /// Checks that every count table agrees with the assignments.
    pub fn counts_consistent(&self) -> bool {
        let k = self.n_topics;
        let mut n_dk = vec![0u32; self.n_dk.len()];
        let mut n_kw = vec![0u32; self.n_kw.len()];
        let mut n_k = vec![0u32; k];
        for d in 0..self.n_docs() {
            for i in self.doc_ptr[d]..self.doc_ptr[d + 1] {
                let t = self.z[i] as usize;
                n_dk[d * k + t] += 1;
                n_kw[self.words[i] as usize * k + t] += 1;
                n_k[t] += 1;
            }
        }
        n_dk == self.n_dk && n_kw == self.n_kw && n_k == self.n_k
    }

    /// Smoothed estimates from the current counts:
    /// `phi[k][w] = (n_kw + eta) / (n_k + V eta)` and
    /// `theta[d][k] = (n_dk + alpha) / (n_d + K alpha)`.
    pub fn current_estimates(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = self.n_topics;
        let v = self.n_terms;
        let mut phi = vec![0.0; k * v];
        for t in 0..k {
            let denom = f64::from(self.n_k[t]) + v as f64 * self.eta;
            for w in 0..v {
                phi[t * v + w] = (f64::from(self.n_kw[w * k + t]) + self.eta) / denom;
            }
        }
        let theta = (0..self.n_docs())
            .map(|d| {
                let len = (self.doc_ptr[d + 1] - self.doc_ptr[d]) as f64;
                let denom = len + k as f64 * self.alpha;
                self.n_dk[d * k..(d + 1) * k]
                    .iter()
                    .map(|&n| (f64::from(n) + self.alpha) / denom)
                    .collect()
            })
            .collect();
        (phi, theta)
    }
}

/// Fits LDA to `dtm` by collapsed Gibbs sampling.
///
/// Documents without tokens are allowed; their estimated mixture is the
/// prior mean `1 / K` in every topic.
pub fn fit_lda(dtm: &DocumentTermMatrix, config: &GibbsConfig) -> Result<EstimatedModel> {
    let mut sampler = GibbsSampler::new(dtm, config)?;
    let k = config.n_topics;
    let v = dtm.n_terms();
    let mut trace = Vec::new();
    let mut phi_sum = vec![0.0; k * v];
    let mut theta_sum = vec![vec![0.0; k]; dtm.n_docs()];
    let mut samples = 0usize;

    for s in 1..=config.n_sweeps {
        sampler.sweep();
        if s % config.trace_every == 0 || s == config.n_sweeps {
            trace.push((s, sampler.joint_log_likelihood()));
        }
        if config.average_samples && s > config.burn_in {
            let (phi, theta) = sampler.current_estimates();
            for (a, b) in phi_sum.iter_mut().zip(phi) {
                *a += b;
            }
            for (row, est) in theta_sum.iter_mut().zip(theta) {
                for (a, b) in row.iter_mut().zip(est) {
                    *a += b;
                }
            }
            samples += 1;
        }
    }

    let (phi, theta_hat) = if config.average_samples {
        let n = samples as f64;
        phi_sum.iter_mut().for_each(|x| *x /= n);
        theta_sum.iter_mut().flatten().for_each(|x| *x /= n);
        (phi_sum, theta_sum)
    } else {
        sampler.current_estimates()
    };

    Ok(EstimatedModel {
        phi: TopicWordMatrix::from_flat(k, v, phi)?,
        theta_hat,
        vocab: dtm.vocab().clone(),
        log_likelihood_trace: trace,
        config: config.clone(),
    })
}
