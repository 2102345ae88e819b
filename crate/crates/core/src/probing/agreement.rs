//! Diagnostic classification of auxiliary-verb agreement: featurize each
//! (auxiliary, verb form) pair from an embedding space and test whether a
//! logistic probe can tell plausible combinations from implausible ones.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{derive_rng, stratified_folds, Featurizer, MeanStd};
use crate::corpus::AgreementDataset;
use crate::embeddings::{compose_additive, compose_intersective, Space};
use crate::numerics::{train_logistic, truncated_svd, DenseMatrix, LogisticConfig};
use crate::{Error, Result};
use rand::Rng;

/// Featurized agreement instances, ready for cross-validated probing. Sparse
/// spaces are projected to `svd_k` dimensions here (per-token rows for
/// concatenation, per-instance compositions otherwise).
#[derive(Debug, Clone)]
pub struct PreparedAgreement {
    pub features: DenseMatrix,
    pub labels: Vec<bool>,
    pub auxiliaries: Vec<String>,
    pub dropped_instances: usize,
    pub effective_svd_k: Option<usize>,
}

pub fn prepare_agreement(
    space: &Space,
    dataset: &AgreementDataset,
    featurizer: Featurizer,
    svd_k: Option<usize>,
    seed: u64,
) -> Result<PreparedAgreement> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut effective_svd_k = None;

    match space {
        Space::Dense(dense) => {
            if svd_k.is_some() {
                return Err(Error::Config(
                    "svd projection only applies to sparse spaces".into(),
                ));
            }
            for (at, instance) in dataset.instances.iter().enumerate() {
                let (aux, verb) = (
                    dense.vector(&instance.auxiliary),
                    dense.vector(&instance.verb_form),
                );
                if let (Some(aux), Some(verb)) = (aux, verb) {
                    let row = match featurizer {
                        Featurizer::Concat => {
                            let mut row = aux.to_vec();
                            row.extend_from_slice(verb);
                            row
                        }
                        Featurizer::Compose => compose_additive(&[aux, verb])
                            .expect("vectors from one space share a dimension"),
                    };
                    rows.push(row);
                    kept.push(at);
                }
            }
        }
        Space::Sparse(sparse) => {
            let requested = svd_k.ok_or_else(|| {
                Error::Config("sparse spaces require an svd projection dimension".into())
            })?;
            let svd_seed = derive_rng(seed, u64::MAX).gen::<u64>();
            let n_features = sparse.feature_vocab().len();

            match featurizer {
                Featurizer::Concat => {
                    let mut token_rows = Vec::new();
                    let mut row_of_token: BTreeMap<&str, usize> = BTreeMap::new();
                    let mut pairs: Vec<(usize, usize)> = Vec::new();
                    for (at, instance) in dataset.instances.iter().enumerate() {
                        let (aux, verb) = (
                            sparse.vector(&instance.auxiliary),
                            sparse.vector(&instance.verb_form),
                        );
                        if let (Some(aux), Some(verb)) = (aux, verb) {
                            let aux_at = *row_of_token
                                .entry(instance.auxiliary.as_str())
                                .or_insert_with(|| {
                                    token_rows.push(aux.clone());
                                    token_rows.len() - 1
                                });
                            let verb_at = *row_of_token
                                .entry(instance.verb_form.as_str())
                                .or_insert_with(|| {
                                    token_rows.push(verb.clone());
                                    token_rows.len() - 1
                                });
                            pairs.push((aux_at, verb_at));
                            kept.push(at);
                        }
                    }
                    if token_rows.is_empty() {
                        return Err(Error::InvalidInput(
                            "no instance has full vector coverage".into(),
                        ));
                    }
                    let k = requested.min(token_rows.len()).min(n_features).max(1);
                    let projected = truncated_svd(&token_rows, n_features, k, svd_seed)?
                        .row_projection();
                    effective_svd_k = Some(k);
                    for (aux_at, verb_at) in pairs {
                        let mut row = projected.row(aux_at).to_vec();
                        row.extend_from_slice(projected.row(verb_at));
                        rows.push(row);
                    }
                }
                Featurizer::Compose => {
                    let mut composed = Vec::new();
                    for (at, instance) in dataset.instances.iter().enumerate() {
                        let (aux, verb) = (
                            sparse.vector(&instance.auxiliary),
                            sparse.vector(&instance.verb_form),
                        );
                        if let (Some(aux), Some(verb)) = (aux, verb) {
                            composed.push(compose_intersective(aux, verb));
                            kept.push(at);
                        }
                    }
                    if composed.is_empty() {
                        return Err(Error::InvalidInput(
                            "no instance has full vector coverage".into(),
                        ));
                    }
                    let k = requested.min(composed.len()).min(n_features).max(1);
                    let projected =
                        truncated_svd(&composed, n_features, k, svd_seed)?.row_projection();
                    effective_svd_k = Some(k);
                    for at in 0..composed.len() {
                        rows.push(projected.row(at).to_vec());
                    }
                }
            }
        }
    }

    if kept.is_empty() {
        return Err(Error::InvalidInput(
            "no instance has full vector coverage".into(),
        ));
    }
    let features = DenseMatrix::from_rows(&rows)?;
    let labels = kept.iter().map(|&at| dataset.instances[at].label.is_plausible()).collect();
    let auxiliaries = kept.iter().map(|&at| dataset.instances[at].auxiliary.clone()).collect();
    Ok(PreparedAgreement {
        features,
        labels,
        auxiliaries,
        dropped_instances: dataset.instances.len() - kept.len(),
        effective_svd_k,
    })
}

/// Cross-validated probe accuracy, overall and per auxiliary.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub featurizer: Featurizer,
    pub overall: MeanStd,
    pub per_aux: BTreeMap<String, MeanStd>,
    pub fold_accuracies: Vec<f64>,
    pub instances_used: usize,
    pub dropped_instances: usize,
    pub feature_dim: usize,
    pub effective_svd_k: Option<usize>,
}

/// Trains one logistic probe per (repeat, fold) evaluation and averages test
/// accuracy over all J·K of them.
pub fn run_agreement(
    space: &Space,
    dataset: &AgreementDataset,
    featurizer: Featurizer,
    j: usize,
    k: usize,
    seed: u64,
    svd_k: Option<usize>,
) -> Result<AgreementReport> {
    let prep = prepare_agreement(space, dataset, featurizer, svd_k, seed)?;
    let plan = stratified_folds(&prep.labels, j, k, seed)?;

    let units: Vec<(usize, usize)> = (0..j).flat_map(|r| (0..k).map(move |f| (r, f))).collect();
    type UnitResult = (f64, BTreeMap<String, (usize, usize)>);
    let evaluations: Vec<UnitResult> = units
        .into_par_iter()
        .map(|(repeat, fold)| {
            let train = plan.train_fold(repeat, fold);
            let train_rows: Vec<Vec<f64>> =
                train.iter().map(|&i| prep.features.row(i).to_vec()).collect();
            let train_labels: Vec<bool> = train.iter().map(|&i| prep.labels[i]).collect();
            let fit = train_logistic(
                &DenseMatrix::from_rows(&train_rows)?,
                &train_labels,
                &LogisticConfig::default(),
            )?;

            let mut correct = 0usize;
            let mut per_aux: BTreeMap<String, (usize, usize)> = BTreeMap::new();
            let test = plan.test_fold(repeat, fold);
            for &i in test {
                let p = fit.model.predict(prep.features.row(i))?;
                let hit = (p >= 0.5) == prep.labels[i];
                correct += hit as usize;
                let slot = per_aux.entry(prep.auxiliaries[i].clone()).or_insert((0, 0));
                slot.0 += hit as usize;
                slot.1 += 1;
            }
            Ok((correct as f64 / test.len() as f64, per_aux))
        })
        .collect::<Result<_>>()?;

    let fold_accuracies: Vec<f64> = evaluations.iter().map(|(acc, _)| *acc).collect();
    let mut per_aux_values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (_, counts) in &evaluations {
        for (aux, &(correct, total)) in counts {
            per_aux_values
                .entry(aux.clone())
                .or_default()
                .push(correct as f64 / total as f64);
        }
    }
    let per_aux = per_aux_values
        .into_iter()
        .map(|(aux, values)| (aux, MeanStd::from_values(&values)))
        .collect();

    Ok(AgreementReport {
        featurizer,
        overall: MeanStd::from_values(&fold_accuracies),
        per_aux,
        fold_accuracies,
        instances_used: prep.labels.len(),
        dropped_instances: prep.dropped_instances,
        feature_dim: prep.features.cols(),
        effective_svd_k: prep.effective_svd_k,
    })
}
