//! Temporal entailment over sentence pairs: load the annotated pair format,
//! score each pair by embedding similarity, and evaluate with threshold-free
//! metrics, rate analyses, and majority baselines.

mod io;
mod metrics;

pub use io::{load_predictions, load_tea};
pub use metrics::{
    average_precision, baselines, eval_external, fp_fn_rates, pr_curve, rates_at_threshold,
    tense_pair_table, Baselines, ExternalEval, FpFnBin, PrPoint, PRCurve, TensePairRow,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::{
    binc, compose_additive, compose_intersective, cosine, cosine_sparse,
    distributional_inference, distributional_inference_sparse, Composer, DenseEmbeddingSpace,
    Space, SparseEmbeddingSpace, SparseVector,
};
use crate::tense::TenseTag;
use crate::{Error, Result};

/// Gold label of a premise/hypothesis pair.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum EntailmentLabel {
    Entailment,
    NonEntailment,
}

impl EntailmentLabel {
    pub fn name(self) -> &'static str {
        match self {
            EntailmentLabel::Entailment => "entailment",
            EntailmentLabel::NonEntailment => "non-entailment",
        }
    }

    pub fn is_entailment(self) -> bool {
        self == EntailmentLabel::Entailment
    }
}

impl std::fmt::Display for EntailmentLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EntailmentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entailment" => Ok(EntailmentLabel::Entailment),
            "non-entailment" => Ok(EntailmentLabel::NonEntailment),
            other => Err(Error::InvalidInput(format!("unknown label '{other}'"))),
        }
    }
}

/// One annotated sentence pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeaExample {
    pub id: String,
    pub premise: Vec<String>,
    pub hypothesis: Vec<String>,
    pub premise_tense: TenseTag,
    pub hypothesis_tense: TenseTag,
    pub label: EntailmentLabel,
}

impl TeaExample {
    pub fn new(
        id: String,
        premise: Vec<String>,
        hypothesis: Vec<String>,
        premise_tense: TenseTag,
        hypothesis_tense: TenseTag,
        label: EntailmentLabel,
    ) -> Result<TeaExample> {
        if premise.is_empty() {
            return Err(Error::InvalidInput(format!("example '{id}' has an empty premise")));
        }
        if hypothesis.is_empty() {
            return Err(Error::InvalidInput(format!(
                "example '{id}' has an empty hypothesis"
            )));
        }
        Ok(TeaExample { id, premise, hypothesis, premise_tense, hypothesis_tense, label })
    }
}

/// A pair with its similarity (or external model) score attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredExample {
    pub id: String,
    pub score: f64,
    pub label: EntailmentLabel,
}

/// Similarity measure applied to the two sentence vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scorer {
    Cosine,
    Binc,
}

impl Scorer {
    pub fn name(self) -> &'static str {
        match self {
            Scorer::Cosine => "cosine",
            Scorer::Binc => "binc",
        }
    }
}

impl std::fmt::Display for Scorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Scorer::Cosine),
            "binc" => Ok(Scorer::Binc),
            other => Err(Error::InvalidInput(format!(
                "unknown scorer '{other}' (expected cosine or binc)"
            ))),
        }
    }
}

/// What to do with a token that has no vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OovPolicy {
    Skip,
    Error,
}

impl std::str::FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip" => Ok(OovPolicy::Skip),
            "error" => Ok(OovPolicy::Error),
            other => Err(Error::InvalidInput(format!(
                "unknown oov policy '{other}' (expected skip or error)"
            ))),
        }
    }
}

const FUNCTION_WORDS: &[&str] = &[
    "a", "about", "am", "an", "and", "are", "as", "at", "be", "been", "being", "but", "by",
    "can", "could", "did", "do", "does", "for", "from", "had", "has", "have", "he", "her",
    "his", "i", "if", "in", "into", "is", "it", "its", "may", "might", "must", "my", "no",
    "not", "of", "on", "or", "our", "shall", "she", "so", "some", "such", "than", "that",
    "the", "their", "them", "then", "there", "these", "they", "this", "those", "to", "up",
    "was", "we", "were", "will", "with", "would", "you", "your",
];

/// Everything that is not a closed-class function word counts as content.
pub fn is_content_word(token: &str) -> bool {
    !FUNCTION_WORDS.iter().any(|w| token.eq_ignore_ascii_case(w))
}

/// A composed sentence representation in either kind of space.
#[derive(Debug, Clone, PartialEq)]
pub enum SentenceVector {
    Dense(Vec<f64>),
    Sparse(SparseVector),
}

/// Composition result plus how many tokens actually contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedSentence {
    pub vector: SentenceVector,
    pub used_tokens: usize,
    pub oov_tokens: usize,
}

impl ComposedSentence {
    /// True when no token had a vector, i.e. the sentence composed to zero.
    pub fn is_empty(&self) -> bool {
        self.used_tokens == 0
    }
}

fn check_composer(space: &Space, composer: Composer) -> Result<()> {
    let ok = match space {
        Space::Dense(_) => composer.suits_dense(),
        Space::Sparse(_) => composer.suits_sparse(),
    };
    if ok {
        Ok(())
    } else {
        let kind = if space.is_sparse() { "sparse" } else { "dense" };
        Err(Error::Config(format!(
            "composer '{composer}' does not suit a {kind} space"
        )))
    }
}

fn dense_sentence(
    space: &DenseEmbeddingSpace,
    tokens: &[String],
    oov_policy: OovPolicy,
    inference_k: usize,
) -> Result<(Vec<f64>, usize, usize)> {
    let mut parts: Vec<Vec<f64>> = Vec::new();
    let mut oov = 0;
    for token in tokens {
        if space.vector(token).is_none() {
            match oov_policy {
                OovPolicy::Skip => {
                    oov += 1;
                    continue;
                }
                OovPolicy::Error => return Err(Error::UnknownToken(token.clone())),
            }
        }
        let vector = if inference_k > 0 && is_content_word(token) {
            distributional_inference(space, token, inference_k)?
        } else {
            space.vector(token).expect("presence checked above").to_vec()
        };
        parts.push(vector);
    }
    let used = parts.len();
    let composed = if parts.is_empty() {
        vec![0.0; space.dim()]
    } else {
        let refs: Vec<&[f64]> = parts.iter().map(Vec::as_slice).collect();
        compose_additive(&refs)?
    };
    Ok((composed, used, oov))
}

fn sparse_sentence(
    space: &SparseEmbeddingSpace,
    tokens: &[String],
    oov_policy: OovPolicy,
    inference_k: usize,
) -> Result<(SparseVector, usize, usize)> {
    let mut composed: Option<SparseVector> = None;
    let mut used = 0;
    let mut oov = 0;
    for token in tokens {
        if space.vector(token).is_none() {
            match oov_policy {
                OovPolicy::Skip => {
                    oov += 1;
                    continue;
                }
                OovPolicy::Error => return Err(Error::UnknownToken(token.clone())),
            }
        }
        let vector = if inference_k > 0 && is_content_word(token) {
            distributional_inference_sparse(space, token, inference_k)?
        } else {
            space.vector(token).expect("presence checked above").clone()
        };
        composed = Some(match composed {
            None => vector,
            Some(acc) => compose_intersective(&acc, &vector),
        });
        used += 1;
    }
    Ok((composed.unwrap_or_else(SparseVector::empty), used, oov))
}

/// Composes one sentence with the given composer; all-OOV sentences come back
/// as the zero vector with `used_tokens == 0` under the skip policy.
pub fn sentence_vector(
    space: &Space,
    tokens: &[String],
    composer: Composer,
    oov_policy: OovPolicy,
) -> Result<ComposedSentence> {
    check_composer(space, composer)?;
    match space {
        Space::Dense(dense) => {
            let (vector, used, oov) = dense_sentence(dense, tokens, oov_policy, 0)?;
            Ok(ComposedSentence {
                vector: SentenceVector::Dense(vector),
                used_tokens: used,
                oov_tokens: oov,
            })
        }
        Space::Sparse(sparse) => {
            let (vector, used, oov) = sparse_sentence(sparse, tokens, oov_policy, 0)?;
            Ok(ComposedSentence {
                vector: SentenceVector::Sparse(vector),
                used_tokens: used,
                oov_tokens: oov,
            })
        }
    }
}

/// Scoring knobs: similarity measure, composition, optional neighbor
/// enrichment of content tokens, out-of-vocabulary handling, and whether
/// function words are excluded from composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreOptions {
    pub scorer: Scorer,
    pub composer: Composer,
    pub inference_k: usize,
    pub oov_policy: OovPolicy,
    pub content_words_only: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            scorer: Scorer::Cosine,
            composer: Composer::Additive,
            inference_k: 0,
            oov_policy: OovPolicy::Skip,
            content_words_only: false,
        }
    }
}

/// Scored pairs plus counts of what the skip policy had to drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutcome {
    pub scored: Vec<ScoredExample>,
    pub skipped_tokens: usize,
    pub zero_sentences: usize,
}

/// Scores every pair by composing each side and comparing the two vectors.
/// A sentence with no usable tokens composes to zero and scores 0 against
/// anything.
pub fn score_pairs(
    space: &Space,
    examples: &[TeaExample],
    options: &ScoreOptions,
) -> Result<ScoreOutcome> {
    check_composer(space, options.composer)?;
    if options.scorer == Scorer::Binc && !space.is_sparse() {
        return Err(Error::Config("binc scoring needs a sparse space".into()));
    }

    let filter = |tokens: &[String]| -> Vec<String> {
        if options.content_words_only {
            tokens.iter().filter(|t| is_content_word(t)).cloned().collect()
        } else {
            tokens.to_vec()
        }
    };

    let per_example: Vec<(ScoredExample, usize, usize)> = examples
        .par_iter()
        .map(|example| {
            let premise = filter(&example.premise);
            let hypothesis = filter(&example.hypothesis);
            let (score, used_p, used_h, oov) = match space {
                Space::Dense(dense) => {
                    let (p, used_p, oov_p) =
                        dense_sentence(dense, &premise, options.oov_policy, options.inference_k)?;
                    let (h, used_h, oov_h) = dense_sentence(
                        dense,
                        &hypothesis,
                        options.oov_policy,
                        options.inference_k,
                    )?;
                    (cosine(&p, &h)?, used_p, used_h, oov_p + oov_h)
                }
                Space::Sparse(sparse) => {
                    let (p, used_p, oov_p) =
                        sparse_sentence(sparse, &premise, options.oov_policy, options.inference_k)?;
                    let (h, used_h, oov_h) = sparse_sentence(
                        sparse,
                        &hypothesis,
                        options.oov_policy,
                        options.inference_k,
                    )?;
                    let score = match options.scorer {
                        Scorer::Cosine => cosine_sparse(&p, &h),
                        Scorer::Binc => {
                            if p.is_empty() {
                                0.0
                            } else {
                                binc(&p, &h)?
                            }
                        }
                    };
                    (score, used_p, used_h, oov_p + oov_h)
                }
            };
            let zero = (used_p == 0) as usize + (used_h == 0) as usize;
            let scored = ScoredExample {
                id: example.id.clone(),
                score,
                label: example.label,
            };
            Ok((scored, oov, zero))
        })
        .collect::<Result<_>>()?;

    let mut outcome = ScoreOutcome {
        scored: Vec::with_capacity(per_example.len()),
        skipped_tokens: 0,
        zero_sentences: 0,
    };
    for (scored, oov, zero) in per_example {
        outcome.scored.push(scored);
        outcome.skipped_tokens += oov;
        outcome.zero_sentences += zero;
    }
    Ok(outcome)
}
