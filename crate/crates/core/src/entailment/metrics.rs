//! Threshold-free evaluation of scored pairs: average precision and the
//! precision/recall curve over tie groups, false-positive/false-negative
//! rates along a threshold sweep, and the majority baselines the scores
//! have to beat.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::entailment::{EntailmentLabel, ScoredExample, TeaExample};
use crate::tense::TenseTag;
use crate::{Error, Result};

/// Cumulative counts after each tie group when ranked by descending score.
struct TieGroup {
    score: f64,
    true_positives: usize,
    false_positives: usize,
}

/// Groups examples with exactly equal scores so that ties contribute a
/// single precision/recall point instead of an order-dependent staircase.
fn tie_groups(scored: &[ScoredExample]) -> Result<(Vec<TieGroup>, usize)> {
    if scored.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate an empty score list".into()));
    }
    for s in scored {
        if !s.score.is_finite() {
            return Err(Error::InvalidInput(format!(
                "example '{}' has a non-finite score",
                s.id
            )));
        }
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].score.total_cmp(&scored[a].score));

    let mut groups: Vec<TieGroup> = Vec::new();
    let mut tp = 0;
    let mut fp = 0;
    let mut i = 0;
    while i < order.len() {
        let score = scored[order[i]].score;
        while i < order.len() && scored[order[i]].score == score {
            if scored[order[i]].label.is_entailment() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        groups.push(TieGroup { score, true_positives: tp, false_positives: fp });
    }
    let positives = tp;
    if positives == 0 {
        return Err(Error::InvalidInput(
            "average precision needs at least one positive example".into(),
        ));
    }
    Ok((groups, positives))
}

/// Area under the precision/recall curve, accumulated as sum of
/// (recall gain) x (precision) over descending tie groups. A constant
/// scorer therefore gets exactly the positive fraction.
pub fn average_precision(scored: &[ScoredExample]) -> Result<f64> {
    let (groups, positives) = tie_groups(scored)?;
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for group in &groups {
        let recall = group.true_positives as f64 / positives as f64;
        let precision = group.true_positives as f64
            / (group.true_positives + group.false_positives) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

/// One point per distinct score, descending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Precision/recall curve plus the area under it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PRCurve {
    pub points: Vec<PrPoint>,
    pub average_precision: f64,
}

/// The curve traced by predicting positive at or above each distinct score.
pub fn pr_curve(scored: &[ScoredExample]) -> Result<PRCurve> {
    let (groups, positives) = tie_groups(scored)?;
    let mut points = Vec::with_capacity(groups.len());
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for group in &groups {
        let recall = group.true_positives as f64 / positives as f64;
        let precision = group.true_positives as f64
            / (group.true_positives + group.false_positives) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(PrPoint { threshold: group.score, precision, recall });
    }
    Ok(PRCurve { points, average_precision: ap })
}

fn class_counts(scored: &[ScoredExample]) -> Result<(usize, usize)> {
    let positives = scored.iter().filter(|s| s.label.is_entailment()).count();
    let negatives = scored.len() - positives;
    if positives == 0 {
        return Err(Error::InvalidInput(
            "rate analysis needs at least one positive example".into(),
        ));
    }
    if negatives == 0 {
        return Err(Error::InvalidInput(
            "rate analysis needs at least one negative example".into(),
        ));
    }
    Ok((positives, negatives))
}

/// False-positive and false-negative rates when predicting entailment for
/// every score at or above `threshold`.
pub fn rates_at_threshold(scored: &[ScoredExample], threshold: f64) -> Result<(f64, f64)> {
    let (positives, negatives) = class_counts(scored)?;
    let mut false_positives = 0;
    let mut false_negatives = 0;
    for s in scored {
        let predicted = s.score >= threshold;
        if predicted && !s.label.is_entailment() {
            false_positives += 1;
        }
        if !predicted && s.label.is_entailment() {
            false_negatives += 1;
        }
    }
    Ok((
        false_positives as f64 / negatives as f64,
        false_negatives as f64 / positives as f64,
    ))
}

/// Error rates at one sweep threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpFnBin {
    pub threshold: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
}

/// Sweeps `bins` equal-width thresholds across the score range, taking the
/// lower edge of each bin. All-identical scores collapse to a single bin.
pub fn fp_fn_rates(scored: &[ScoredExample], bins: usize) -> Result<Vec<FpFnBin>> {
    if bins == 0 {
        return Err(Error::InvalidInput("fp/fn sweep needs at least one bin".into()));
    }
    class_counts(scored)?;
    for s in scored {
        if !s.score.is_finite() {
            return Err(Error::InvalidInput(format!(
                "example '{}' has a non-finite score",
                s.id
            )));
        }
    }
    let min = scored.iter().map(|s| s.score).fold(f64::INFINITY, f64::min);
    let max = scored.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
    let thresholds: Vec<f64> = if min == max {
        vec![min]
    } else {
        (0..bins).map(|i| min + i as f64 * (max - min) / bins as f64).collect()
    };
    thresholds
        .into_iter()
        .map(|threshold| {
            let (fp_rate, fn_rate) = rates_at_threshold(scored, threshold)?;
            Ok(FpFnBin { threshold, fp_rate, fn_rate })
        })
        .collect()
}

/// One tense-pair cell of the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TensePairRow {
    pub premise_tense: TenseTag,
    pub hypothesis_tense: TenseTag,
    pub total: usize,
    pub positives: usize,
    pub majority: EntailmentLabel,
}

/// Per tense-pair counts and majority labels, sorted by tense pair.
pub fn tense_pair_table(examples: &[TeaExample]) -> Vec<TensePairRow> {
    let mut cells: BTreeMap<(TenseTag, TenseTag), (usize, usize)> = BTreeMap::new();
    for example in examples {
        let cell = cells
            .entry((example.premise_tense, example.hypothesis_tense))
            .or_insert((0, 0));
        cell.0 += 1;
        if example.label.is_entailment() {
            cell.1 += 1;
        }
    }
    cells
        .into_iter()
        .map(|((premise_tense, hypothesis_tense), (total, positives))| TensePairRow {
            premise_tense,
            hypothesis_tense,
            total,
            positives,
            majority: majority_of(positives, total),
        })
        .collect()
}

/// Ties go to non-entailment.
fn majority_of(positives: usize, total: usize) -> EntailmentLabel {
    if positives * 2 > total {
        EntailmentLabel::Entailment
    } else {
        EntailmentLabel::NonEntailment
    }
}

fn f1(true_positives: usize, false_positives: usize, false_negatives: usize) -> f64 {
    let denominator = 2 * true_positives + false_positives + false_negatives;
    if denominator == 0 {
        0.0
    } else {
        2.0 * true_positives as f64 / denominator as f64
    }
}

fn macro_f1_from_confusion(
    true_positives: usize,
    false_positives: usize,
    false_negatives: usize,
    true_negatives: usize,
) -> f64 {
    let positive_f1 = f1(true_positives, false_positives, false_negatives);
    let negative_f1 = f1(true_negatives, false_negatives, false_positives);
    (positive_f1 + negative_f1) / 2.0
}

/// What label-only predictors achieve on the dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baselines {
    pub majority_label: EntailmentLabel,
    pub majority_accuracy: f64,
    pub majority_ap: f64,
    pub per_tense_pair_accuracy: f64,
    pub per_tense_pair_f1: f64,
    pub tense_pairs: Vec<TensePairRow>,
}

/// Majority-label and per-tense-pair-majority baselines. `majority_ap` is
/// the average precision of any constant scorer: the positive fraction.
pub fn baselines(examples: &[TeaExample]) -> Result<Baselines> {
    if examples.is_empty() {
        return Err(Error::InvalidInput("cannot compute baselines without examples".into()));
    }
    let n = examples.len();
    let positives = examples.iter().filter(|e| e.label.is_entailment()).count();
    let majority_label = majority_of(positives, n);
    let correct = examples.iter().filter(|e| e.label == majority_label).count();

    let tense_pairs = tense_pair_table(examples);
    let mut cell_majorities: BTreeMap<(TenseTag, TenseTag), EntailmentLabel> = BTreeMap::new();
    for row in &tense_pairs {
        cell_majorities.insert((row.premise_tense, row.hypothesis_tense), row.majority);
    }
    let mut cell_correct = 0;
    let mut confusion = [0usize; 4];
    for example in examples {
        let predicted = cell_majorities[&(example.premise_tense, example.hypothesis_tense)];
        if predicted == example.label {
            cell_correct += 1;
        }
        match (predicted.is_entailment(), example.label.is_entailment()) {
            (true, true) => confusion[0] += 1,
            (true, false) => confusion[1] += 1,
            (false, true) => confusion[2] += 1,
            (false, false) => confusion[3] += 1,
        }
    }

    Ok(Baselines {
        majority_label,
        majority_accuracy: correct as f64 / n as f64,
        majority_ap: positives as f64 / n as f64,
        per_tense_pair_accuracy: cell_correct as f64 / n as f64,
        per_tense_pair_f1: macro_f1_from_confusion(
            confusion[0],
            confusion[1],
            confusion[2],
            confusion[3],
        ),
        tense_pairs,
    })
}

/// Metrics for externally produced scores at the conventional 0.5 cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExternalEval {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub average_precision: f64,
}

fn list_ids(ids: &[&str]) -> String {
    const SHOWN: usize = 10;
    let mut text = ids.iter().take(SHOWN).copied().collect::<Vec<_>>().join(", ");
    if ids.len() > SHOWN {
        text.push_str(&format!(" and {} more", ids.len() - SHOWN));
    }
    text
}

/// Joins predictions to gold examples by id and evaluates them; every
/// example needs exactly one prediction and vice versa.
pub fn eval_external(
    predictions: &[(String, f64)],
    examples: &[TeaExample],
) -> Result<ExternalEval> {
    let mut by_id: BTreeMap<&str, f64> = BTreeMap::new();
    for (id, score) in predictions {
        if !(0.0..=1.0).contains(score) {
            return Err(Error::InvalidInput(format!(
                "prediction for id '{id}' has score {score}, outside [0, 1]"
            )));
        }
        if by_id.insert(id, *score).is_some() {
            return Err(Error::InvalidInput(format!("duplicate prediction for id '{id}'")));
        }
    }

    let mut missing = Vec::new();
    let mut scored = Vec::with_capacity(examples.len());
    for example in examples {
        match by_id.remove(example.id.as_str()) {
            Some(score) => scored.push(ScoredExample {
                id: example.id.clone(),
                score,
                label: example.label,
            }),
            None => missing.push(example.id.as_str()),
        }
    }
    let extra: Vec<&str> = by_id.into_keys().collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!("predictions missing for ids: {}", list_ids(&missing)));
        }
        if !extra.is_empty() {
            parts.push(format!("predictions for unknown ids: {}", list_ids(&extra)));
        }
        return Err(Error::InvalidInput(parts.join("; ")));
    }

    let mut confusion = [0usize; 4];
    for s in &scored {
        let predicted = s.score >= 0.5;
        match (predicted, s.label.is_entailment()) {
            (true, true) => confusion[0] += 1,
            (true, false) => confusion[1] += 1,
            (false, true) => confusion[2] += 1,
            (false, false) => confusion[3] += 1,
        }
    }
    let correct = confusion[0] + confusion[3];

    Ok(ExternalEval {
        accuracy: correct as f64 / scored.len() as f64,
        macro_f1: macro_f1_from_confusion(confusion[0], confusion[1], confusion[2], confusion[3]),
        average_precision: average_precision(&scored)?,
    })
}
