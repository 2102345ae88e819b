//! Probing experiments over embedding spaces: diagnostic classification of
//! auxiliary-verb agreement under repeated stratified cross-validation, and
//! tense translation in vector space (averaged offsets and a small network)
//! scored by mean reciprocal rank, with stability summaries across runs.

mod agreement;
mod translate;

pub use agreement::{prepare_agreement, run_agreement, AgreementReport, PreparedAgreement};
pub use translate::{
    generate_inflected, learn_offset, matrix_stability, mrr, offset_stability,
    prepare_translation, run_nn_experiment, run_offset_experiment, NnExperiment,
    OffsetExperiment, PreparedTranslation, QuerySpace, SeedSet, StabilityStats,
    TranslationOffset,
};

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One ChaCha stream per work unit, so parallel units draw independent
/// randomness and results do not depend on scheduling order.
pub(crate) fn derive_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How an (auxiliary, verb form) pair becomes one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Featurizer {
    /// Concatenate the two token vectors (doubles the dimension).
    Concat,
    /// Combine the two token vectors with the space's composition operation.
    Compose,
}

impl Featurizer {
    pub fn name(self) -> &'static str {
        match self {
            Featurizer::Concat => "concat",
            Featurizer::Compose => "compose",
        }
    }
}

impl fmt::Display for Featurizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Featurizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(Featurizer::Concat),
            "compose" => Ok(Featurizer::Compose),
            other => Err(Error::InvalidInput(format!(
                "unknown featurizer '{other}' (expected concat or compose)"
            ))),
        }
    }
}

/// Mean and sample standard deviation of a batch of measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn from_values(values: &[f64]) -> MeanStd {
        let n = values.len();
        if n == 0 {
            return MeanStd { mean: 0.0, std: 0.0, n: 0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            (ss / (n - 1) as f64).sqrt()
        };
        MeanStd { mean, std, n }
    }
}

/// Repeated stratified K-fold assignments: `assignments[repeat][fold]` holds
/// the test indices for that evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub j: usize,
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<Vec<Vec<usize>>>,
}

impl FoldPlan {
    pub fn test_fold(&self, repeat: usize, fold: usize) -> &[usize] {
        &self.assignments[repeat][fold]
    }

    /// All indices outside the given fold, ascending.
    pub fn train_fold(&self, repeat: usize, fold: usize) -> Vec<usize> {
        let mut train: Vec<usize> = self.assignments[repeat]
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, indices)| indices.iter().copied())
            .collect();
        train.sort_unstable();
        train
    }
}

/// Splits indices into K folds, J times over, keeping each class spread as
/// evenly as the counts allow: every fold gets either ⌊n_c/K⌋ or ⌈n_c/K⌉
/// members of class c.
pub fn stratified_folds(labels: &[bool], j: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if j == 0 {
        return Err(Error::InvalidInput("fold plan needs at least one repeat".into()));
    }
    if k < 2 {
        return Err(Error::InvalidInput("fold plan needs at least two folds".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    for (name, count) in [("positive", positives), ("negative", negatives)] {
        if count < k {
            return Err(Error::InvalidInput(format!(
                "{name} class has {count} instances, too few for {k} folds"
            )));
        }
    }

    let mut assignments = Vec::with_capacity(j);
    for repeat in 0..j {
        let mut rng = derive_rng(seed, repeat as u64);
        let mut folds = vec![Vec::new(); k];
        for class in [true, false] {
            let mut members: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|&(_, &label)| label == class)
                .map(|(i, _)| i)
                .collect();
            members.shuffle(&mut rng);
            let start = rng.gen_range(0..k);
            for (offset, idx) in members.into_iter().enumerate() {
                folds[(start + offset) % k].push(idx);
            }
        }
        for fold in &mut folds {
            fold.sort_unstable();
        }
        assignments.push(folds);
    }
    Ok(FoldPlan { j, k, seed, assignments })
}
