//! Vocabulary pruning for LDA topic models, studied by Monte Carlo
//! simulation.
//!
//! The pipeline: draw a synthetic corpus with known topics
//! ([`corpus`]), count it into a document-term matrix ([`dtm`]), remove
//! infrequent terms ([`pruning`]), fit LDA by collapsed Gibbs sampling
//! ([`lda`]) and score the estimate against the truth ([`metrics`]).
//! [`experiment`] repeats this over replications, criteria and cut-offs;
//! [`io`] holds the file formats and [`cli`] the `topicprune` binary.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `generate_corpus` | drawing a corpus and writing it to disk |
//! | `prune_vocabulary` | the three pruning criteria at matched sizes |
//! | `fit_lda` | fitting and inspecting one model |
//! | `evaluate_topics` | recall, model fit, coherence and similarity |
//! | `vocab_curve` | vocabulary size against the cut-off |
//! | `desk_experiment` | a small resumable Monte Carlo run |
//!
//! ```
//! use topicprune::corpus::{generate_corpus, DgpConfig};
//! use topicprune::dtm::build_dtm;
//! use topicprune::pruning::prune_by_relative_df;
//!
//! let corpus = generate_corpus(&DgpConfig::new(50, 40.0, 200, 4, 7)).unwrap();
//! let dtm = build_dtm(&corpus.docs).unwrap();
//! let pruned = prune_by_relative_df(&dtm, 0.05).unwrap();
//! assert!(pruned.n_terms() <= dtm.n_terms());
//! ```

pub mod cli;
pub mod corpus;
pub mod dtm;
pub mod error;
pub mod experiment;
pub mod io;
pub mod lda;
pub mod metrics;
pub mod pruning;
pub mod seed;

pub use error::{Error, Result};
