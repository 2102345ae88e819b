//! Tense translation in vector space: learn an offset (or a small network)
//! that maps a lemma vector to its inflected form, then score retrieval of
//! the right form out of a query space of every candidate.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::derive_rng;
use crate::corpus::TranslationDataset;
use crate::embeddings::{
    compose_additive, compose_intersective, cosine, euclidean, Space, SparseVector,
};
use crate::numerics::{
    dot, norm, train_translation_net, truncated_svd, NetConfig, TranslationNet,
};
use crate::tense::TenseTag;
use crate::{Error, Result};

/// The candidates an inflected-form prediction is ranked against: every
/// contextualized auxiliary+verb combination and every bare inflected form
/// in the dataset, each under a unique label key.
#[derive(Debug, Clone)]
pub struct QuerySpace {
    keys: Vec<String>,
    rows: Vec<Vec<f64>>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

impl QuerySpace {
    pub fn from_items(items: Vec<(String, Vec<f64>)>) -> Result<QuerySpace> {
        let dim = match items.first() {
            Some((_, row)) => row.len(),
            None => return Err(Error::InvalidInput("query space needs at least one item".into())),
        };
        let mut keys = Vec::with_capacity(items.len());
        let mut rows = Vec::with_capacity(items.len());
        let mut index = HashMap::with_capacity(items.len());
        for (key, row) in items {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "query item '{key}' has {} dimensions, expected {dim}",
                    row.len()
                )));
            }
            if index.insert(key.clone(), keys.len()).is_some() {
                return Err(Error::InvalidInput(format!("duplicate query-space key '{key}'")));
            }
            keys.push(key);
            rows.push(row);
        }
        let norms = rows.iter().map(|row| norm(row)).collect();
        Ok(QuerySpace { keys, rows, norms, index })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn position(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, i: usize) -> &str {
        &self.keys[i]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn items(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.keys.iter().map(String::as_str).zip(self.rows.iter().map(Vec::as_slice))
    }
}

/// The lemmas an offset is averaged over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedSet {
    pub verbs: Vec<String>,
    pub seed: u64,
}

impl SeedSet {
    pub fn new(verbs: Vec<String>, seed: u64) -> Result<SeedSet> {
        if verbs.is_empty() {
            return Err(Error::InvalidInput("seed set needs at least one verb".into()));
        }
        let mut distinct = HashSet::new();
        for verb in &verbs {
            if !distinct.insert(verb.as_str()) {
                return Err(Error::InvalidInput(format!("seed verb '{verb}' appears twice")));
            }
        }
        Ok(SeedSet { verbs, seed })
    }
}

/// Averaged difference between inflected-form and lemma vectors for one tense.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationOffset {
    pub tense: TenseTag,
    pub offset: Vec<f64>,
}

/// Everything the translation experiments need for one tense, resolved
/// against a concrete space: per-verb lemma and gold target vectors, the gold
/// label keys, and the query space drawn from the whole dataset. Sparse
/// spaces are composed intersectively and projected to `svd_k` dimensions
/// here, so the experiments themselves only ever see dense rows.
#[derive(Debug, Clone)]
pub struct PreparedTranslation {
    pub tense: TenseTag,
    pub verbs: Vec<String>,
    pub lemma_rows: Vec<Vec<f64>>,
    pub target_rows: Vec<Vec<f64>>,
    pub gold_keys: Vec<String>,
    pub qspace: QuerySpace,
    pub dropped_verbs: Vec<String>,
    pub dropped_query_items: usize,
    pub effective_svd_k: Option<usize>,
}

impl PreparedTranslation {
    pub fn dim(&self) -> usize {
        self.qspace.dim()
    }
}

enum ItemSpec {
    Bare(String),
    Combo(String, String),
}

fn query_item_specs(dataset: &TranslationDataset) -> Vec<(String, ItemSpec)> {
    let mut specs = Vec::new();
    let mut seen = HashSet::new();
    for pairs in dataset.values() {
        for pair in pairs {
            let bare = pair.target.last().expect("translation targets are never empty");
            if pair.target.len() > 1 {
                let key = pair.target.join(" ");
                if seen.insert(key.clone()) {
                    specs.push((key, ItemSpec::Combo(pair.target[0].clone(), bare.clone())));
                }
            }
            if seen.insert(bare.clone()) {
                specs.push((bare.clone(), ItemSpec::Bare(bare.clone())));
            }
        }
    }
    specs
}

pub fn prepare_translation(
    space: &Space,
    dataset: &TranslationDataset,
    tense: TenseTag,
    svd_k: Option<usize>,
    seed: u64,
) -> Result<PreparedTranslation> {
    let eval_pairs = dataset.get(&tense).map(Vec::as_slice).unwrap_or(&[]);
    if eval_pairs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no translation pairs for tense '{tense}'"
        )));
    }
    let specs = query_item_specs(dataset);

    let mut items: Vec<(String, Vec<f64>)> = Vec::new();
    let mut dropped_query_items = 0;
    let mut lemma_lookup: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut effective_svd_k = None;

    match space {
        Space::Dense(dense) => {
            if svd_k.is_some() {
                return Err(Error::Config(
                    "svd projection only applies to sparse spaces".into(),
                ));
            }
            for (key, spec) in specs {
                let row = match &spec {
                    ItemSpec::Bare(token) => dense.vector(token).map(<[f64]>::to_vec),
                    ItemSpec::Combo(aux, verb) => match (dense.vector(aux), dense.vector(verb)) {
                        (Some(a), Some(v)) => Some(
                            compose_additive(&[a, v])
                                .expect("vectors from one space share a dimension"),
                        ),
                        _ => None,
                    },
                };
                match row {
                    Some(row) => items.push((key, row)),
                    None => dropped_query_items += 1,
                }
            }
            for pair in eval_pairs {
                if let Some(vec) = dense.vector(&pair.lemma) {
                    lemma_lookup.insert(pair.lemma.as_str(), vec.to_vec());
                }
            }
        }
        Space::Sparse(sparse) => {
            let requested = svd_k.ok_or_else(|| {
                Error::Config("sparse spaces require an svd projection dimension".into())
            })?;
            let mut rows: Vec<SparseVector> = Vec::new();
            let mut row_of_token: HashMap<String, usize> = HashMap::new();
            let mut item_rows: Vec<(String, usize)> = Vec::new();
            for (key, spec) in specs {
                let row = match &spec {
                    ItemSpec::Bare(token) => sparse.vector(token).cloned(),
                    ItemSpec::Combo(aux, verb) => {
                        match (sparse.vector(aux), sparse.vector(verb)) {
                            (Some(a), Some(v)) => Some(compose_intersective(a, v)),
                            _ => None,
                        }
                    }
                };
                match row {
                    Some(row) => {
                        row_of_token.insert(key.clone(), rows.len());
                        item_rows.push((key, rows.len()));
                        rows.push(row);
                    }
                    None => dropped_query_items += 1,
                }
            }
            let mut lemma_rows_idx: Vec<(&str, usize)> = Vec::new();
            for pair in eval_pairs {
                if let Some(&at) = row_of_token.get(pair.lemma.as_str()) {
                    lemma_rows_idx.push((pair.lemma.as_str(), at));
                } else if let Some(vec) = sparse.vector(&pair.lemma) {
                    row_of_token.insert(pair.lemma.clone(), rows.len());
                    lemma_rows_idx.push((pair.lemma.as_str(), rows.len()));
                    rows.push(vec.clone());
                }
            }
            if rows.is_empty() {
                return Err(Error::InvalidInput(
                    "no dataset token has a vector in the sparse space".into(),
                ));
            }
            let n_features = sparse.feature_vocab().len();
            let k = requested.min(rows.len()).min(n_features).max(1);
            let svd_seed = derive_rng(seed, u64::MAX).gen::<u64>();
            let svd = truncated_svd(&rows, n_features, k, svd_seed)?;
            let projected = svd.row_projection();
            effective_svd_k = Some(k);
            for (key, at) in item_rows {
                items.push((key, projected.row(at).to_vec()));
            }
            for (lemma, at) in lemma_rows_idx {
                lemma_lookup.insert(lemma, projected.row(at).to_vec());
            }
        }
    }

    if items.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no query-space item has vector coverage for tense '{tense}'"
        )));
    }
    let qspace = QuerySpace::from_items(items)?;

    let mut verbs = Vec::new();
    let mut lemma_rows = Vec::new();
    let mut target_rows = Vec::new();
    let mut gold_keys = Vec::new();
    let mut dropped_verbs = Vec::new();
    for pair in eval_pairs {
        let gold = pair.target.join(" ");
        match (lemma_lookup.get(pair.lemma.as_str()), qspace.position(&gold)) {
            (Some(lemma_vec), Some(at)) => {
                verbs.push(pair.lemma.clone());
                lemma_rows.push(lemma_vec.clone());
                target_rows.push(qspace.vector(at).to_vec());
                gold_keys.push(gold);
            }
            _ => dropped_verbs.push(pair.lemma.clone()),
        }
    }
    if verbs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no verb has full vector coverage for tense '{tense}'"
        )));
    }

    Ok(PreparedTranslation {
        tense,
        verbs,
        lemma_rows,
        target_rows,
        gold_keys,
        qspace,
        dropped_verbs,
        dropped_query_items,
        effective_svd_k,
    })
}

/// Averaged offset over the seed verbs: o = (1/n)·Σ (target − lemma).
pub fn learn_offset(prepared: &PreparedTranslation, seeds: &SeedSet) -> Result<TranslationOffset> {
    let dim = prepared
        .lemma_rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidInput("prepared data has no verbs".into()))?;
    let mut sum = vec![0.0; dim];
    for verb in &seeds.verbs {
        let at = prepared
            .verbs
            .iter()
            .position(|v| v == verb)
            .ok_or_else(|| Error::InvalidInput(format!("seed verb '{verb}' has no vectors")))?;
        for ((s, t), l) in sum.iter_mut().zip(&prepared.target_rows[at]).zip(&prepared.lemma_rows[at]) {
            *s += t - l;
        }
    }
    let n = seeds.verbs.len() as f64;
    let offset: Vec<f64> = sum.into_iter().map(|s| s / n).collect();
    if offset.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("offset is not finite".into()));
    }
    Ok(TranslationOffset { tense: prepared.tense, offset })
}

/// Predicted inflected-form vector: lemma + offset.
pub fn generate_inflected(offset: &TranslationOffset, lemma_vec: &[f64]) -> Result<Vec<f64>> {
    if offset.offset.len() != lemma_vec.len() {
        return Err(Error::Dimension(format!(
            "offset of dimension {} applied to a vector of dimension {}",
            offset.offset.len(),
            lemma_vec.len()
        )));
    }
    Ok(lemma_vec.iter().zip(&offset.offset).map(|(x, o)| x + o).collect())
}

/// Mean reciprocal rank of the gold keys when the query space is sorted by
/// cosine to each generated vector. Ties rank in query-space order, i.e. an
/// equal-similarity item only outranks the gold one if it was listed first.
pub fn mrr(predictions: &[(Vec<f64>, String)], qspace: &QuerySpace) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput("mrr needs at least one prediction".into()));
    }
    let mut total = 0.0;
    for (generated, gold) in predictions {
        if generated.len() != qspace.dim() {
            return Err(Error::Dimension(format!(
                "generated vector of dimension {} against a query space of dimension {}",
                generated.len(),
                qspace.dim()
            )));
        }
        let gold_at = qspace.position(gold).ok_or_else(|| {
            Error::InvalidInput(format!("gold key '{gold}' is not in the query space"))
        })?;
        let qn = norm(generated);
        let similarity = |i: usize| {
            if qn == 0.0 || qspace.norms[i] == 0.0 {
                0.0
            } else {
                dot(generated, &qspace.rows[i]) / (qn * qspace.norms[i])
            }
        };
        let gold_sim = similarity(gold_at);
        let mut rank = 1usize;
        for i in 0..qspace.len() {
            let sim = similarity(i);
            if sim > gold_sim || (sim == gold_sim && i < gold_at) {
                rank += 1;
            }
        }
        total += 1.0 / rank as f64;
    }
    Ok(total / predictions.len() as f64)
}

/// Offset experiment over several sampled seed sets: each set learns an
/// offset from `n` verbs and is scored by MRR on all remaining verbs.
#[derive(Debug, Clone, Serialize)]
pub struct OffsetExperiment {
    pub tense: TenseTag,
    pub mrr_mean: f64,
    pub per_set_mrr: Vec<f64>,
    pub seed_sets: Vec<SeedSet>,
    pub offsets: Vec<TranslationOffset>,
}

pub fn run_offset_experiment(
    prepared: &PreparedTranslation,
    n: usize,
    num_seed_sets: usize,
    seed: u64,
) -> Result<OffsetExperiment> {
    if n == 0 || num_seed_sets == 0 {
        return Err(Error::InvalidInput(
            "offset experiment needs n ≥ 1 and at least one seed set".into(),
        ));
    }
    if prepared.verbs.len() <= n {
        return Err(Error::InvalidInput(format!(
            "{} verbs cannot hold out seed sets of {n} and still leave evaluation verbs",
            prepared.verbs.len()
        )));
    }

    let runs: Vec<(SeedSet, TranslationOffset, f64)> = (0..num_seed_sets)
        .into_par_iter()
        .map(|set_idx| {
            let mut rng = derive_rng(seed, set_idx as u64);
            let mut picks = rand::seq::index::sample(&mut rng, prepared.verbs.len(), n).into_vec();
            picks.sort_unstable();
            let in_seed: HashSet<usize> = picks.iter().copied().collect();
            let seeds = SeedSet::new(
                picks.iter().map(|&i| prepared.verbs[i].clone()).collect(),
                seed,
            )?;
            let offset = learn_offset(prepared, &seeds)?;
            let predictions: Vec<(Vec<f64>, String)> = (0..prepared.verbs.len())
                .filter(|i| !in_seed.contains(i))
                .map(|i| {
                    Ok((
                        generate_inflected(&offset, &prepared.lemma_rows[i])?,
                        prepared.gold_keys[i].clone(),
                    ))
                })
                .collect::<Result<_>>()?;
            let score = mrr(&predictions, &prepared.qspace)?;
            Ok((seeds, offset, score))
        })
        .collect::<Result<_>>()?;

    let per_set_mrr: Vec<f64> = runs.iter().map(|(_, _, m)| *m).collect();
    let mrr_mean = per_set_mrr.iter().sum::<f64>() / per_set_mrr.len() as f64;
    let (seed_sets, offsets) = runs.into_iter().map(|(s, o, _)| (s, o)).unzip();
    Ok(OffsetExperiment {
        tense: prepared.tense,
        mrr_mean,
        per_set_mrr,
        seed_sets,
        offsets,
    })
}

/// Network experiment under K-fold cross-validation: each fold trains the
/// translation net on the other folds' (lemma, target) pairs and is scored
/// by MRR on its own verbs.
#[derive(Debug, Clone, Serialize)]
pub struct NnExperiment {
    pub tense: TenseTag,
    pub mrr_mean: f64,
    pub per_fold_mrr: Vec<f64>,
    #[serde(skip)]
    pub nets: Vec<TranslationNet>,
}

/// Per-fold network seeds derive from `seed`, superseding `config.seed`.
pub fn run_nn_experiment(
    prepared: &PreparedTranslation,
    folds: usize,
    config: &NetConfig,
    seed: u64,
) -> Result<NnExperiment> {
    if folds < 2 {
        return Err(Error::InvalidInput("cross-validation needs at least two folds".into()));
    }
    if prepared.verbs.len() < folds {
        return Err(Error::InvalidInput(format!(
            "{} verbs cannot fill {folds} folds",
            prepared.verbs.len()
        )));
    }

    let mut order: Vec<usize> = (0..prepared.verbs.len()).collect();
    {
        use rand::seq::SliceRandom;
        order.shuffle(&mut derive_rng(seed, 0));
    }
    let fold_of: Vec<usize> = {
        let mut fold_of = vec![0; order.len()];
        for (pos, &idx) in order.iter().enumerate() {
            fold_of[idx] = pos % folds;
        }
        fold_of
    };

    let runs: Vec<(TranslationNet, f64)> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let train_pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..prepared.verbs.len())
                .filter(|&i| fold_of[i] != fold)
                .map(|i| (prepared.lemma_rows[i].clone(), prepared.target_rows[i].clone()))
                .collect();
            let net_seed = derive_rng(seed, fold as u64 + 1).gen::<u64>();
            let net = train_translation_net(
                &train_pairs,
                &NetConfig { seed: net_seed, ..config.clone() },
            )?;
            let predictions: Vec<(Vec<f64>, String)> = (0..prepared.verbs.len())
                .filter(|&i| fold_of[i] == fold)
                .map(|i| Ok((net.forward(&prepared.lemma_rows[i])?, prepared.gold_keys[i].clone())))
                .collect::<Result<_>>()?;
            let score = mrr(&predictions, &prepared.qspace)?;
            Ok((net, score))
        })
        .collect::<Result<_>>()?;

    let per_fold_mrr: Vec<f64> = runs.iter().map(|(_, m)| *m).collect();
    let mrr_mean = per_fold_mrr.iter().sum::<f64>() / per_fold_mrr.len() as f64;
    let nets = runs.into_iter().map(|(net, _)| net).collect();
    Ok(NnExperiment { tense: prepared.tense, mrr_mean, per_fold_mrr, nets })
}

/// Mean pairwise cosine similarity and Euclidean distance across offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityStats {
    pub mean_cosine: f64,
    pub mean_euclidean: f64,
}

pub fn offset_stability(offsets: &[TranslationOffset]) -> Result<StabilityStats> {
    if offsets.len() < 2 {
        return Err(Error::InvalidInput("stability needs at least two offsets".into()));
    }
    let mut cos = 0.0;
    let mut euc = 0.0;
    let mut pairs = 0usize;
    for i in 0..offsets.len() {
        for j in i + 1..offsets.len() {
            cos += cosine(&offsets[i].offset, &offsets[j].offset)?;
            euc += euclidean(&offsets[i].offset, &offsets[j].offset)?;
            pairs += 1;
        }
    }
    Ok(StabilityStats {
        mean_cosine: cos / pairs as f64,
        mean_euclidean: euc / pairs as f64,
    })
}

/// Mean pairwise Frobenius distance between the nets' flattened parameters.
pub fn matrix_stability(nets: &[TranslationNet]) -> Result<f64> {
    if nets.len() < 2 {
        return Err(Error::InvalidInput("stability needs at least two networks".into()));
    }
    let params: Vec<Vec<f64>> = nets.iter().map(TranslationNet::params).collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..params.len() {
        for j in i + 1..params.len() {
            total += euclidean(&params[i], &params[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_translation_dataset, VerbParadigm};
    use crate::embeddings::{DenseEmbeddingSpace, SparseEmbeddingSpace, Vocab};
    use crate::numerics::DenseMatrix;
    use crate::tense::InflectionClass;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn qspace(items: &[(&str, &[f64])]) -> QuerySpace {
        QuerySpace::from_items(
            items.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect(),
        )
        .unwrap()
    }

    fn prediction(vector: &[f64], gold: &str) -> (Vec<f64>, String) {
        (vector.to_vec(), gold.to_string())
    }

    #[test]
    fn query_space_rejects_duplicates_and_ragged_rows() {
        let dup = QuerySpace::from_items(vec![
            ("walked".into(), vec![1.0]),
            ("walked".into(), vec![2.0]),
        ]);
        assert!(dup.unwrap_err().to_string().contains("duplicate query-space key"));
        let ragged = QuerySpace::from_items(vec![
            ("a".into(), vec![1.0]),
            ("b".into(), vec![1.0, 2.0]),
        ]);
        assert!(ragged.is_err());
        assert!(QuerySpace::from_items(Vec::new()).is_err());
    }

    #[test]
    fn query_space_preserves_insertion_order() {
        let space = qspace(&[("b", &[1.0, 0.0]), ("a", &[0.0, 1.0])]);
        assert_eq!(space.key(0), "b");
        assert_eq!(space.position("a"), Some(1));
        assert_eq!(space.len(), 2);
        let items: Vec<&str> = space.items().map(|(k, _)| k).collect();
        assert_eq!(items, ["b", "a"]);
    }

    #[test]
    fn exact_match_ranks_first() {
        let space = qspace(&[
            ("x", &[1.0, 0.0, 0.0]),
            ("y", &[0.0, 1.0, 0.0]),
            ("z", &[0.0, 0.0, 1.0]),
        ]);
        let score = mrr(&[prediction(&[0.0, 1.0, 0.0], "y")], &space).unwrap();
        assert_eq!(score, 1.0);
    }

    #[test]
    fn reciprocal_ranks_average_by_hand() {
        // Four items fan out at increasing angles from the probe direction,
        // so golds at positions 0, 1, and 3 rank 1, 2, and 4.
        let space = qspace(&[
            ("k0", &[1.0, 0.0]),
            ("k1", &[1.0, 0.5]),
            ("k2", &[1.0, 1.0]),
            ("k3", &[0.0, 1.0]),
        ]);
        let probe = [1.0, 0.0];
        let predictions = [
            prediction(&probe, "k0"),
            prediction(&probe, "k1"),
            prediction(&probe, "k3"),
        ];
        let score = mrr(&predictions, &space).unwrap();
        assert_relative_eq!(score, 7.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn ties_rank_in_query_order() {
        let space = qspace(&[("first", &[1.0, 0.0]), ("second", &[1.0, 0.0])]);
        let probe = [2.0, 0.0];
        assert_eq!(mrr(&[prediction(&probe, "first")], &space).unwrap(), 1.0);
        assert_eq!(mrr(&[prediction(&probe, "second")], &space).unwrap(), 0.5);
    }

    #[test]
    fn unknown_gold_keys_and_empty_predictions_are_errors() {
        let space = qspace(&[("a", &[1.0])]);
        let missing = mrr(&[prediction(&[1.0], "b")], &space).unwrap_err();
        assert!(missing.to_string().contains("gold key 'b'"));
        assert!(mrr(&[], &space).is_err());
        assert!(mrr(&[prediction(&[1.0, 2.0], "a")], &space).is_err());
    }

    #[test]
    fn mrr_agrees_with_a_full_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for round in 0..25 {
            let n_items = rng.gen_range(2..40);
            let dim = rng.gen_range(2..6);
            let items: Vec<(String, Vec<f64>)> = (0..n_items)
                .map(|i| {
                    let row: Vec<f64> =
                        (0..dim).map(|_| (rng.gen_range(-3..=3i32)) as f64).collect();
                    (format!("item{i}"), row)
                })
                .collect();
            let space = QuerySpace::from_items(items.clone()).unwrap();
            let predictions: Vec<(Vec<f64>, String)> = (0..10)
                .map(|_| {
                    let probe: Vec<f64> =
                        (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let gold = format!("item{}", rng.gen_range(0..n_items));
                    (probe, gold)
                })
                .collect();

            let mut expected = 0.0;
            for (probe, gold) in &predictions {
                let mut scored: Vec<(usize, f64)> = items
                    .iter()
                    .enumerate()
                    .map(|(i, (_, row))| (i, cosine(probe, row).unwrap()))
                    .collect();
                scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                let gold_at = items.iter().position(|(k, _)| k == gold).unwrap();
                let rank = scored.iter().position(|&(i, _)| i == gold_at).unwrap() + 1;
                expected += 1.0 / rank as f64;
            }
            expected /= predictions.len() as f64;

            let got = mrr(&predictions, &space).unwrap();
            assert_eq!(got, expected, "round {round}");
        }
    }

    #[test]
    fn rescaling_the_query_space_leaves_mrr_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let items: Vec<(String, Vec<f64>)> = (0..20)
            .map(|i| (format!("q{i}"), (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()))
            .collect();
        let scaled: Vec<(String, Vec<f64>)> = items
            .iter()
            .map(|(k, row)| (k.clone(), row.iter().map(|x| x * 3.5).collect()))
            .collect();
        let predictions: Vec<(Vec<f64>, String)> = (0..8)
            .map(|i| {
                let probe: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
                (probe, format!("q{}", i * 2))
            })
            .collect();
        let base = mrr(&predictions, &QuerySpace::from_items(items).unwrap()).unwrap();
        let after = mrr(&predictions, &QuerySpace::from_items(scaled).unwrap()).unwrap();
        assert_eq!(base, after);
    }

    fn hand_prepared(lemmas: &[(&str, [f64; 2], [f64; 2])]) -> PreparedTranslation {
        let items: Vec<(String, Vec<f64>)> = lemmas
            .iter()
            .map(|(name, _, target)| (format!("{name}ed"), target.to_vec()))
            .collect();
        PreparedTranslation {
            tense: TenseTag::PastSimple,
            verbs: lemmas.iter().map(|(name, _, _)| name.to_string()).collect(),
            lemma_rows: lemmas.iter().map(|(_, lemma, _)| lemma.to_vec()).collect(),
            target_rows: lemmas.iter().map(|(_, _, target)| target.to_vec()).collect(),
            gold_keys: lemmas.iter().map(|(name, _, _)| format!("{name}ed")).collect(),
            qspace: QuerySpace::from_items(items).unwrap(),
            dropped_verbs: Vec::new(),
            dropped_query_items: 0,
            effective_svd_k: None,
        }
    }

    #[test]
    fn offsets_average_the_seed_differences() {
        let prepared = hand_prepared(&[
            ("walk", [1.0, 1.0], [2.0, 3.0]),
            ("talk", [3.0, 3.0], [4.0, 5.0]),
        ]);
        let seeds = SeedSet::new(vec!["walk".into(), "talk".into()], 0).unwrap();
        let learned = learn_offset(&prepared, &seeds).unwrap();
        assert_eq!(learned.offset, vec![1.0, 2.0]);
        assert_eq!(learned.tense, TenseTag::PastSimple);

        let still = hand_prepared(&[("stay", [2.0, 5.0], [2.0, 5.0])]);
        let seeds = SeedSet::new(vec!["stay".into()], 0).unwrap();
        assert_eq!(learn_offset(&still, &seeds).unwrap().offset, vec![0.0, 0.0]);
    }

    #[test]
    fn shifting_every_target_shifts_the_offset_exactly() {
        let base = hand_prepared(&[
            ("walk", [1.0, 1.0], [2.0, 3.0]),
            ("talk", [3.0, 3.0], [4.0, 5.0]),
        ]);
        let shifted = hand_prepared(&[
            ("walk", [1.0, 1.0], [12.0, 0.0]),
            ("talk", [3.0, 3.0], [14.0, 2.0]),
        ]);
        let seeds = SeedSet::new(vec!["walk".into(), "talk".into()], 0).unwrap();
        let a = learn_offset(&base, &seeds).unwrap();
        let b = learn_offset(&shifted, &seeds).unwrap();
        let delta: Vec<f64> = b.offset.iter().zip(&a.offset).map(|(x, y)| x - y).collect();
        assert_eq!(delta, vec![10.0, -3.0]);
    }

    #[test]
    fn missing_seed_verbs_are_named() {
        let prepared = hand_prepared(&[("walk", [1.0, 1.0], [2.0, 3.0])]);
        let seeds = SeedSet::new(vec!["vanish".into()], 0).unwrap();
        let err = learn_offset(&prepared, &seeds).unwrap_err();
        assert!(err.to_string().contains("seed verb 'vanish'"));
    }

    #[test]
    fn seed_sets_must_hold_distinct_verbs() {
        assert!(SeedSet::new(Vec::new(), 0).is_err());
        let err = SeedSet::new(vec!["walk".into(), "walk".into()], 0).unwrap_err();
        assert!(err.to_string().contains("appears twice"));
    }

    #[test]
    fn generation_adds_the_offset() {
        let offset = TranslationOffset {
            tense: TenseTag::PastSimple,
            offset: vec![1.0, 2.0],
        };
        assert_eq!(generate_inflected(&offset, &[0.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        let zero = TranslationOffset {
            tense: TenseTag::PastSimple,
            offset: vec![0.0, 0.0],
        };
        assert_eq!(generate_inflected(&zero, &[4.0, 5.0]).unwrap(), vec![4.0, 5.0]);
        assert!(generate_inflected(&offset, &[1.0]).is_err());
    }

    /// Space where every inflected form sits at lemma + a constant per-tense
    /// shift, all integer-valued so the averaged offsets come out exact.
    fn linear_fixture(
        num_verbs: usize,
        dim: usize,
        seed: u64,
    ) -> (Space, TranslationDataset, BTreeMap<TenseTag, Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: i32, hi: i32| -> Vec<f64> {
            (0..dim).map(|_| rng.gen_range(lo..=hi) as f64).collect()
        };

        let class_shift: BTreeMap<InflectionClass, Vec<f64>> = InflectionClass::ALL
            .into_iter()
            .map(|class| {
                let shift = if class == InflectionClass::Infinitive {
                    vec![0.0; dim]
                } else {
                    draw(-4, 4)
                };
                (class, shift)
            })
            .collect();
        let aux_vecs: BTreeMap<&str, Vec<f64>> = ["will", "has", "had", "is", "was"]
            .into_iter()
            .map(|aux| (aux, draw(-4, 4)))
            .collect();

        let mut vocab = Vocab::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let add = |vocab: &mut Vocab, rows: &mut Vec<Vec<f64>>, token: String, row: Vec<f64>| {
            let id = vocab.intern(&token);
            assert_eq!(id, rows.len(), "token {token} interned twice");
            rows.push(row);
        };
        for (aux, vec) in &aux_vecs {
            add(&mut vocab, &mut rows, aux.to_string(), vec.clone());
        }

        let mut paradigms = Vec::new();
        for v in 0..num_verbs {
            let base = draw(-8, 8);
            let lemma = format!("v{v:03}");
            let mut forms = Vec::new();
            for class in InflectionClass::ALL {
                let suffix = match class {
                    InflectionClass::Infinitive => "",
                    InflectionClass::ThirdSingular => "s",
                    InflectionClass::Past => "d",
                    InflectionClass::PastParticiple => "n",
                    InflectionClass::PresentParticiple => "g",
                };
                let token = format!("{lemma}{suffix}");
                let row: Vec<f64> = base
                    .iter()
                    .zip(&class_shift[&class])
                    .map(|(b, s)| b + s)
                    .collect();
                add(&mut vocab, &mut rows, token.clone(), row);
                forms.push((token, 100));
            }
            paradigms.push(VerbParadigm::new(lemma, forms.try_into().unwrap()).unwrap());
        }

        let dataset = build_translation_dataset(&paradigms, 1);
        let matrix = DenseMatrix::from_rows(&rows).unwrap();
        let space = Space::Dense(DenseEmbeddingSpace::from_parts(vocab, matrix).unwrap());

        let true_offsets = TenseTag::ALL
            .into_iter()
            .map(|tense| {
                let mut shift = class_shift[&tense.verb_form()].clone();
                if let Some(aux) = tense.auxiliary() {
                    for (s, a) in shift.iter_mut().zip(&aux_vecs[aux]) {
                        *s += a;
                    }
                }
                (tense, shift)
            })
            .collect();
        (space, dataset, true_offsets)
    }

    #[test]
    fn linear_fixture_recovers_offsets_and_perfect_mrr() {
        let (space, dataset, true_offsets) = linear_fixture(40, 12, 2024);
        for tense in [TenseTag::PastSimple, TenseTag::PresentPerfect, TenseTag::ModalFuture] {
            let prepared = prepare_translation(&space, &dataset, tense, None, 5).unwrap();
            assert_eq!(prepared.verbs.len(), 40);
            assert!(prepared.dropped_verbs.is_empty());

            let result = run_offset_experiment(&prepared, 5, 3, 11).unwrap();
            assert_eq!(result.mrr_mean, 1.0, "tense {tense}");
            for offset in &result.offsets {
                assert_eq!(offset.offset, true_offsets[&tense], "tense {tense}");
            }
        }
    }

    #[test]
    fn offset_experiment_is_deterministic_and_holds_out_seeds() {
        let (space, dataset, _) = linear_fixture(24, 6, 99);
        let prepared =
            prepare_translation(&space, &dataset, TenseTag::PresentProgressive, None, 5).unwrap();
        let a = run_offset_experiment(&prepared, 4, 3, 17).unwrap();
        let b = run_offset_experiment(&prepared, 4, 3, 17).unwrap();
        assert_eq!(a.per_set_mrr, b.per_set_mrr);
        assert_eq!(a.offsets, b.offsets);
        assert_eq!(a.seed_sets, b.seed_sets);

        let other = run_offset_experiment(&prepared, 4, 3, 18).unwrap();
        assert_ne!(a.seed_sets, other.seed_sets);

        for set in &a.seed_sets {
            assert_eq!(set.verbs.len(), 4);
            assert!(set.verbs.iter().all(|v| prepared.verbs.contains(v)));
        }
    }

    #[test]
    fn offset_experiment_rejects_degenerate_sizes() {
        let (space, dataset, _) = linear_fixture(6, 4, 1);
        let prepared =
            prepare_translation(&space, &dataset, TenseTag::PastSimple, None, 5).unwrap();
        assert!(run_offset_experiment(&prepared, 0, 3, 0).is_err());
        assert!(run_offset_experiment(&prepared, 2, 0, 0).is_err());
        let err = run_offset_experiment(&prepared, 6, 3, 0).unwrap_err();
        assert!(err.to_string().contains("hold out seed sets"));
    }

    #[test]
    fn nn_experiment_is_deterministic_with_one_net_per_fold() {
        let (space, dataset, _) = linear_fixture(12, 6, 55);
        let prepared =
            prepare_translation(&space, &dataset, TenseTag::PastSimple, None, 5).unwrap();
        let config = NetConfig { hidden: 4, lr: 0.01, epochs: 40, seed: 0 };
        let a = run_nn_experiment(&prepared, 3, &config, 21).unwrap();
        let b = run_nn_experiment(&prepared, 3, &config, 21).unwrap();
        assert_eq!(a.per_fold_mrr, b.per_fold_mrr);
        assert_eq!(a.nets.len(), 3);
        assert_eq!(a.per_fold_mrr.len(), 3);
        assert!(a.per_fold_mrr.iter().all(|m| *m > 0.0 && *m <= 1.0));
        assert_relative_eq!(
            a.mrr_mean,
            a.per_fold_mrr.iter().sum::<f64>() / 3.0,
            max_relative = 1e-15
        );
        for (x, y) in a.nets[0].params().iter().zip(b.nets[0].params()) {
            assert_eq!(*x, y);
        }

        assert!(run_nn_experiment(&prepared, 1, &config, 0).is_err());
        assert!(run_nn_experiment(&prepared, 13, &config, 0).is_err());
    }

    #[test]
    fn orthogonal_unit_offsets_have_known_stability() {
        let offsets = [
            TranslationOffset { tense: TenseTag::PastSimple, offset: vec![1.0, 0.0] },
            TranslationOffset { tense: TenseTag::PastSimple, offset: vec![0.0, 1.0] },
        ];
        let stats = offset_stability(&offsets).unwrap();
        assert_eq!(stats.mean_cosine, 0.0);
        assert_relative_eq!(stats.mean_euclidean, 2.0_f64.sqrt(), max_relative = 1e-15);

        let same = [offsets[0].clone(), offsets[0].clone()];
        let stats = offset_stability(&same).unwrap();
        assert_relative_eq!(stats.mean_cosine, 1.0, max_relative = 1e-12);
        assert_eq!(stats.mean_euclidean, 0.0);

        assert!(offset_stability(&offsets[..1]).is_err());
    }

    #[test]
    fn matrix_stability_matches_direct_computation() {
        let net = |w: f64| {
            TranslationNet::from_parts(
                DenseMatrix::from_vec(1, 2, vec![w, 0.5]).unwrap(),
                vec![0.0, 0.0],
                DenseMatrix::from_vec(2, 1, vec![1.0, -1.0]).unwrap(),
                vec![0.25],
            )
            .unwrap()
        };
        let identical = [net(0.5), net(0.5)];
        assert_eq!(matrix_stability(&identical).unwrap(), 0.0);

        let delta = [net(0.5), net(0.5 + 0.125)];
        assert_eq!(matrix_stability(&delta).unwrap(), 0.125);

        let three = [
            TranslationNet::init(3, 2, 1),
            TranslationNet::init(3, 2, 2),
            TranslationNet::init(3, 2, 3),
        ];
        let mut expected = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (three[i].params(), three[j].params());
                expected += a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
            }
        }
        expected /= 3.0;
        assert_relative_eq!(matrix_stability(&three).unwrap(), expected, max_relative = 1e-15);

        assert!(matrix_stability(&three[..1]).is_err());
    }

    fn tiny_dense_space(entries: &[(&str, &[f64])]) -> Space {
        let mut vocab = Vocab::new();
        let mut rows = Vec::new();
        for (token, row) in entries {
            vocab.intern(token);
            rows.push(row.to_vec());
        }
        Space::Dense(
            DenseEmbeddingSpace::from_parts(vocab, DenseMatrix::from_rows(&rows).unwrap())
                .unwrap(),
        )
    }

    fn walk_talk_dataset() -> TranslationDataset {
        let paradigm = |lemma: &str| {
            VerbParadigm::new(
                lemma.to_string(),
                [
                    (lemma.to_string(), 100),
                    (format!("{lemma}s"), 100),
                    (format!("{lemma}ed"), 100),
                    (format!("{lemma}ed"), 100),
                    (format!("{lemma}ing"), 100),
                ],
            )
            .unwrap()
        };
        build_translation_dataset(&[paradigm("walk"), paradigm("talk")], 1)
    }

    #[test]
    fn preparation_drops_uncovered_verbs_and_query_items() {
        // "talks" has no vector, so present-simple loses the verb "talk" and
        // the query space loses that bare form.
        let space = tiny_dense_space(&[
            ("walk", &[1.0, 0.0]),
            ("walks", &[1.0, 1.0]),
            ("walked", &[2.0, 1.0]),
            ("walking", &[0.5, 0.5]),
            ("talk", &[0.0, 1.0]),
            ("talked", &[3.0, 1.0]),
            ("talking", &[0.25, 0.5]),
            ("will", &[0.0, 0.25]),
            ("has", &[1.0, 0.25]),
            ("had", &[0.5, 0.25]),
            ("is", &[0.75, 0.25]),
            ("was", &[0.25, 0.25]),
        ]);
        let dataset = walk_talk_dataset();

        let prepared =
            prepare_translation(&space, &dataset, TenseTag::PresentSimple, None, 5).unwrap();
        assert_eq!(prepared.verbs, ["walk"]);
        assert_eq!(prepared.dropped_verbs, ["talk"]);
        assert_eq!(prepared.gold_keys, ["walks"]);
        assert_eq!(prepared.dropped_query_items, 1);
        assert!(prepared.qspace.position("has walked").is_some());
        assert!(prepared.qspace.position("will talk").is_some());
        assert!(prepared.qspace.position("walked").is_some());
        assert!(prepared.qspace.position("talks").is_none());
        assert_eq!(prepared.effective_svd_k, None);

        let perfect =
            prepare_translation(&space, &dataset, TenseTag::PresentPerfect, None, 5).unwrap();
        assert_eq!(perfect.verbs, ["walk", "talk"]);
        assert_eq!(perfect.gold_keys, ["has walked", "has talked"]);
        let gold_at = perfect.qspace.position("has walked").unwrap();
        assert_eq!(perfect.qspace.vector(gold_at), &[3.0, 1.25]);
        assert_eq!(perfect.target_rows[0], vec![3.0, 1.25]);
    }

    #[test]
    fn dense_preparation_rejects_svd_and_empty_tenses() {
        let space = tiny_dense_space(&[("walk", &[1.0])]);
        let dataset = walk_talk_dataset();
        let err = prepare_translation(&space, &dataset, TenseTag::PastSimple, Some(2), 5);
        assert!(matches!(err.unwrap_err(), Error::Config(_)));

        let empty: TranslationDataset =
            TenseTag::ALL.into_iter().map(|t| (t, Vec::new())).collect();
        let err = prepare_translation(&space, &empty, TenseTag::PastSimple, None, 5);
        assert!(err.unwrap_err().to_string().contains("no translation pairs"));
    }

    fn tiny_sparse_space() -> Space {
        let tokens = [
            ("walk", vec![(0, 2.0), (1, 1.0), (4, 1.0)]),
            ("walks", vec![(0, 1.0), (1, 2.0)]),
            ("walked", vec![(1, 1.0), (2, 2.0)]),
            ("walking", vec![(2, 1.0), (3, 2.0)]),
            ("talk", vec![(0, 1.0), (3, 1.0), (4, 2.0)]),
            ("talks", vec![(0, 2.0), (4, 1.0)]),
            ("talked", vec![(2, 2.0), (4, 1.0)]),
            ("talking", vec![(3, 1.0), (4, 1.0)]),
            ("will", vec![(0, 1.0), (2, 1.0)]),
            ("has", vec![(1, 1.0), (2, 1.0)]),
            ("had", vec![(2, 1.0), (3, 1.0)]),
            ("is", vec![(0, 1.0), (3, 1.0)]),
            ("was", vec![(1, 1.0), (4, 1.0)]),
        ];
        let mut vocab = Vocab::new();
        let mut feature_vocab = Vocab::new();
        for f in ["f0", "f1", "f2", "f3", "f4"] {
            feature_vocab.intern(f);
        }
        let mut vectors = Vec::new();
        for (token, entries) in tokens {
            vocab.intern(token);
            vectors.push(SparseVector::from_entries(entries).unwrap());
        }
        Space::Sparse(SparseEmbeddingSpace::from_parts(vocab, feature_vocab, vectors).unwrap())
    }

    #[test]
    fn sparse_preparation_projects_through_svd() {
        let space = tiny_sparse_space();
        let dataset = walk_talk_dataset();

        let err = prepare_translation(&space, &dataset, TenseTag::PastSimple, None, 5);
        assert!(matches!(err.unwrap_err(), Error::Config(_)));

        let prepared =
            prepare_translation(&space, &dataset, TenseTag::PastSimple, Some(100), 5).unwrap();
        assert_eq!(prepared.effective_svd_k, Some(5));
        assert_eq!(prepared.dim(), 5);
        assert_eq!(prepared.verbs, ["walk", "talk"]);
        assert!(prepared.qspace.position("has walked").is_some());

        let again =
            prepare_translation(&space, &dataset, TenseTag::PastSimple, Some(100), 5).unwrap();
        assert_eq!(prepared.lemma_rows, again.lemma_rows);
        assert_eq!(prepared.target_rows, again.target_rows);

        let narrow =
            prepare_translation(&space, &dataset, TenseTag::PastSimple, Some(2), 5).unwrap();
        assert_eq!(narrow.effective_svd_k, Some(2));
        assert_eq!(narrow.dim(), 2);
    }
}
