//! Probing toolkit for tense and aspect in word representations.
//!
//! The library answers three questions about an embedding space:
//!
//! 1. Does it encode auxiliary-verb agreement? A diagnostic classifier is
//!    trained to tell plausible auxiliary + verb-form pairs (`has visited`)
//!    from implausible ones (`has visiting`), see [`probing::run_agreement`].
//! 2. Can verbs be re-inflected by moving through the space? Two translation
//!    operations map a lemma vector to a target tense, either by adding an
//!    averaged offset vector or through a small feedforward network, and are
//!    scored by mean reciprocal rank, see [`probing`].
//! 3. Do sentence similarities predict temporal entailment? Sentence pairs
//!    tagged with tenses are scored by cosine or balanced inclusion and
//!    evaluated with average precision against rule-based baselines, see
//!    [`entailment`].
//!
//! [`numerics`] holds the from-scratch optimisation and linear-algebra kernels
//! (Adam, logistic regression, the translation network, randomized truncated
//! SVD); [`embeddings`] the dense and sparse vector spaces; [`corpus`] the
//! dataset builders; [`cli`] the command-line front end.

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod entailment;
pub mod error;
pub mod numerics;
pub mod probing;
pub mod tense;

pub use error::{Error, Result};

/// Toolkit version embedded in every report.
pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
