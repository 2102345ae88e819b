//! The work behind each subcommand: load inputs, run the experiment, write
//! report files into the output directory.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::svg::{bar_chart, Bar};
use super::{ExperimentChoice, RunConfig, SpaceFormat};
use crate::corpus::{
    build_agreement_dataset, build_translation_dataset, count_pairs, load_agreement_dataset,
    load_counts, load_paradigms, load_translation_dataset, merge_counts,
    save_agreement_dataset, save_translation_dataset, AuxInventory, PairCounts,
};
use crate::embeddings::{
    load_dense, load_sparse, nearest_neighbors, nearest_neighbors_sparse, DenseFormat, Space,
};
use crate::entailment::{
    self, baselines, eval_external, fp_fn_rates, pr_curve, score_pairs, Baselines, ExternalEval,
    FpFnBin, PRCurve, ScoreOptions,
};
use crate::numerics::NetConfig;
use crate::probing::{
    matrix_stability, offset_stability, prepare_translation, run_agreement, run_nn_experiment,
    run_offset_experiment, AgreementReport, Featurizer, NnExperiment, OffsetExperiment,
    StabilityStats,
};
use crate::tense::TenseTag;
use crate::{version, Error, Result};

/// Envelope around every JSON report: the toolkit version and the resolved
/// configuration ride along with the payload.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    toolkit_version: &'static str,
    config: &'a RunConfig,
    report: T,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn prepare_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

pub(super) fn load_space(path: &Path, format: SpaceFormat) -> Result<(Space, Vec<String>)> {
    let mut warnings = Vec::new();
    let space = match format {
        SpaceFormat::Word2vec | SpaceFormat::Tsv => {
            let dense_format = match format {
                SpaceFormat::Word2vec => DenseFormat::Word2vecText,
                _ => DenseFormat::Tsv,
            };
            let load = load_dense(path, dense_format)?;
            if load.duplicates_dropped > 0 {
                warnings.push(format!(
                    "dropped {} duplicate tokens while loading {}",
                    load.duplicates_dropped,
                    path.display()
                ));
            }
            Space::Dense(load.space)
        }
        SpaceFormat::Sparse => {
            let load = load_sparse(path)?;
            if load.duplicates_dropped > 0 {
                warnings.push(format!(
                    "dropped {} duplicate tokens while loading {}",
                    load.duplicates_dropped,
                    path.display()
                ));
            }
            if load.nonpositive_dropped > 0 {
                warnings.push(format!(
                    "dropped {} non-positive feature weights while loading {}",
                    load.nonpositive_dropped,
                    path.display()
                ));
            }
            Space::Sparse(load.space)
        }
    };
    Ok((space, warnings))
}

fn print_warnings(warnings: &[String]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

#[derive(Debug)]
pub(super) struct AgreementRun {
    pub embeddings: PathBuf,
    pub format: SpaceFormat,
    pub dataset: PathBuf,
    pub featurizer: Featurizer,
    pub j: usize,
    pub k: usize,
    pub svd_k: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
}

fn per_aux_csv(report: &AgreementReport) -> String {
    let mut csv = String::from("auxiliary,mean_accuracy,std_accuracy,evaluations\n");
    for (auxiliary, stats) in &report.per_aux {
        csv.push_str(&format!(
            "{auxiliary},{:.6},{:.6},{}\n",
            stats.mean, stats.std, stats.n
        ));
    }
    csv
}

pub(super) fn cmd_agreement(run: &AgreementRun, manifest: &RunConfig) -> Result<()> {
    let (space, warnings) = load_space(&run.embeddings, run.format)?;
    print_warnings(&warnings);
    let dataset = load_agreement_dataset(&run.dataset)?;
    let report = run_agreement(
        &space,
        &dataset,
        run.featurizer,
        run.j,
        run.k,
        run.seed,
        run.svd_k,
    )?;

    prepare_out_dir(&run.out)?;
    write_json(
        &run.out.join("agreement.json"),
        &Report { toolkit_version: version(), config: manifest, report: &report },
    )?;
    write_text(&run.out.join("per_aux_accuracy.csv"), &per_aux_csv(&report))?;
    println!(
        "agreement: accuracy {:.4} (std {:.4}) over {} evaluations, {} instances -> {}",
        report.overall.mean,
        report.overall.std,
        report.fold_accuracies.len(),
        report.instances_used,
        run.out.display()
    );
    Ok(())
}

#[derive(Debug)]
pub(super) struct TranslateRun {
    pub embeddings: PathBuf,
    pub format: SpaceFormat,
    pub dataset: PathBuf,
    pub experiment: ExperimentChoice,
    pub tenses: Option<Vec<TenseTag>>,
    pub n: usize,
    pub num_seed_sets: usize,
    pub folds: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub svd_k: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct OffsetSection {
    experiment: OffsetExperiment,
    stability: Option<StabilityStats>,
}

#[derive(Serialize)]
struct NnSection {
    experiment: NnExperiment,
    parameter_distance: f64,
}

#[derive(Serialize)]
struct TenseRun {
    tense: TenseTag,
    verbs_used: usize,
    query_space_size: usize,
    dropped_verbs: Vec<String>,
    dropped_query_items: usize,
    effective_svd_k: Option<usize>,
    offset: Option<OffsetSection>,
    nn: Option<NnSection>,
}

#[derive(Serialize)]
struct TranslateReport {
    tenses: Vec<TenseRun>,
}

fn stability_csv(runs: &[TenseRun]) -> String {
    let mut csv = String::from(
        "tense,experiment,mrr_mean,offset_cosine,offset_euclidean,net_parameter_distance\n",
    );
    for run in runs {
        if let Some(offset) = &run.offset {
            let (cosine, euclidean) = match &offset.stability {
                Some(s) => (format!("{:.6}", s.mean_cosine), format!("{:.6}", s.mean_euclidean)),
                None => (String::new(), String::new()),
            };
            csv.push_str(&format!(
                "{},offset,{:.6},{cosine},{euclidean},\n",
                run.tense, offset.experiment.mrr_mean
            ));
        }
        if let Some(nn) = &run.nn {
            csv.push_str(&format!(
                "{},nn,{:.6},,,{:.6}\n",
                run.tense, nn.experiment.mrr_mean, nn.parameter_distance
            ));
        }
    }
    csv
}

fn mrr_bars(runs: &[TenseRun]) -> Vec<Bar> {
    let mut bars = Vec::new();
    for run in runs {
        if let Some(offset) = &run.offset {
            bars.push(Bar {
                label: format!("{} offset", run.tense),
                value: offset.experiment.mrr_mean,
                color: "#4c78a8",
            });
        }
        if let Some(nn) = &run.nn {
            bars.push(Bar {
                label: format!("{} nn", run.tense),
                value: nn.experiment.mrr_mean,
                color: "#f58518",
            });
        }
    }
    bars
}

pub(super) fn cmd_translate(run: &TranslateRun, manifest: &RunConfig) -> Result<()> {
    let (space, warnings) = load_space(&run.embeddings, run.format)?;
    print_warnings(&warnings);
    let dataset = load_translation_dataset(&run.dataset)?;
    let tenses: Vec<TenseTag> = match &run.tenses {
        Some(list) => list.clone(),
        None => dataset
            .iter()
            .filter(|(_, pairs)| !pairs.is_empty())
            .map(|(tense, _)| *tense)
            .collect(),
    };
    if tenses.is_empty() {
        return Err(Error::InvalidInput("the translation dataset has no pairs".into()));
    }

    let mut runs = Vec::new();
    for &tense in &tenses {
        let prepared = prepare_translation(&space, &dataset, tense, run.svd_k, run.seed)?;
        let offset = if run.experiment.includes_offset() {
            let experiment = run_offset_experiment(&prepared, run.n, run.num_seed_sets, run.seed)?;
            let stability = if experiment.offsets.len() >= 2 {
                Some(offset_stability(&experiment.offsets)?)
            } else {
                None
            };
            Some(OffsetSection { experiment, stability })
        } else {
            None
        };
        let nn = if run.experiment.includes_nn() {
            let config = NetConfig { hidden: run.hidden, epochs: run.epochs, ..NetConfig::default() };
            let experiment = run_nn_experiment(&prepared, run.folds, &config, run.seed)?;
            let parameter_distance = matrix_stability(&experiment.nets)?;
            Some(NnSection { experiment, parameter_distance })
        } else {
            None
        };
        runs.push(TenseRun {
            tense,
            verbs_used: prepared.verbs.len(),
            query_space_size: prepared.qspace.len(),
            dropped_verbs: prepared.dropped_verbs.clone(),
            dropped_query_items: prepared.dropped_query_items,
            effective_svd_k: prepared.effective_svd_k,
            offset,
            nn,
        });
    }

    prepare_out_dir(&run.out)?;
    write_text(
        &run.out.join("mrr.svg"),
        &bar_chart("mean reciprocal rank", &mrr_bars(&runs), 1.0),
    )?;
    write_text(&run.out.join("stability.csv"), &stability_csv(&runs))?;
    for tense_run in &runs {
        if let Some(offset) = &tense_run.offset {
            println!(
                "translate: {} offset mrr {:.4} over {} verbs",
                tense_run.tense, offset.experiment.mrr_mean, tense_run.verbs_used
            );
        }
        if let Some(nn) = &tense_run.nn {
            println!(
                "translate: {} nn mrr {:.4} over {} verbs",
                tense_run.tense, nn.experiment.mrr_mean, tense_run.verbs_used
            );
        }
    }
    write_json(
        &run.out.join("translate.json"),
        &Report {
            toolkit_version: version(),
            config: manifest,
            report: TranslateReport { tenses: runs },
        },
    )?;
    Ok(())
}

#[derive(Debug)]
pub(super) struct EntailRun {
    pub embeddings: PathBuf,
    pub format: SpaceFormat,
    pub dataset: PathBuf,
    pub predictions: Option<PathBuf>,
    pub options: ScoreOptions,
    pub bins: usize,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct EntailReport {
    examples: usize,
    skipped_tokens: usize,
    zero_sentences: usize,
    average_precision: f64,
    pr_curve: PRCurve,
    fp_fn: Vec<FpFnBin>,
    baselines: Baselines,
    external: Option<ExternalEval>,
}

fn pr_csv(curve: &PRCurve) -> String {
    let mut csv = String::from("threshold,precision,recall\n");
    for point in &curve.points {
        csv.push_str(&format!(
            "{:.6},{:.6},{:.6}\n",
            point.threshold, point.precision, point.recall
        ));
    }
    csv
}

fn fp_fn_csv(bins: &[FpFnBin]) -> String {
    let mut csv = String::from("threshold,fp_rate,fn_rate\n");
    for bin in bins {
        csv.push_str(&format!(
            "{:.6},{:.6},{:.6}\n",
            bin.threshold, bin.fp_rate, bin.fn_rate
        ));
    }
    csv
}

pub(super) fn cmd_entail(run: &EntailRun, manifest: &RunConfig) -> Result<()> {
    let (space, warnings) = load_space(&run.embeddings, run.format)?;
    print_warnings(&warnings);
    let examples = entailment::load_tea(&run.dataset)?;
    let outcome = score_pairs(&space, &examples, &run.options)?;
    if outcome.zero_sentences > 0 {
        eprintln!(
            "warning: {} sentences had no usable tokens and composed to zero",
            outcome.zero_sentences
        );
    }
    let curve = pr_curve(&outcome.scored)?;
    let fp_fn = fp_fn_rates(&outcome.scored, run.bins)?;
    let base = baselines(&examples)?;
    let external = match &run.predictions {
        Some(path) => {
            let predictions = entailment::load_predictions(path)?;
            Some(eval_external(&predictions, &examples)?)
        }
        None => None,
    };

    let report = EntailReport {
        examples: examples.len(),
        skipped_tokens: outcome.skipped_tokens,
        zero_sentences: outcome.zero_sentences,
        average_precision: curve.average_precision,
        pr_curve: curve,
        fp_fn,
        baselines: base,
        external,
    };
    prepare_out_dir(&run.out)?;
    write_json(
        &run.out.join("entail.json"),
        &Report { toolkit_version: version(), config: manifest, report: &report },
    )?;
    write_text(&run.out.join("pr_curve.csv"), &pr_csv(&report.pr_curve))?;
    write_text(&run.out.join("fp_fn.csv"), &fp_fn_csv(&report.fp_fn))?;
    println!(
        "entail: average precision {:.4} over {} pairs (majority baseline ap {:.4}) -> {}",
        report.average_precision,
        report.examples,
        report.baselines.majority_ap,
        run.out.display()
    );
    if let Some(external) = &report.external {
        println!(
            "entail: external predictions accuracy {:.4}, macro-f1 {:.4}, ap {:.4}",
            external.accuracy, external.macro_f1, external.average_precision
        );
    }
    Ok(())
}

#[derive(Debug)]
pub(super) struct BuildDataRun {
    pub paradigms: PathBuf,
    pub corpus: Option<PathBuf>,
    pub counts: Option<PathBuf>,
    pub window: usize,
    pub min_freq: u64,
    pub implausible_max: u64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct BuildStats {
    paradigms: usize,
    counted_pairs: usize,
    agreement_instances: usize,
    positive_fraction: f64,
    translation_pairs: BTreeMap<TenseTag, usize>,
    warnings: Vec<String>,
}

pub(super) fn cmd_build_data(run: &BuildDataRun, manifest: &RunConfig) -> Result<()> {
    let paradigms = load_paradigms(&run.paradigms)?;
    let inventory = AuxInventory::default();

    let mut counts = PairCounts::new();
    if let Some(path) = &run.corpus {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for line in text.lines() {
            let line_counts = count_pairs(line.split_whitespace(), &inventory, run.window)?;
            merge_counts(&mut counts, line_counts);
        }
    }
    if let Some(path) = &run.counts {
        merge_counts(&mut counts, load_counts(path)?);
    }

    let agreement =
        build_agreement_dataset(&paradigms, &counts, &inventory, run.min_freq, run.implausible_max);
    let translation = build_translation_dataset(&paradigms, run.min_freq);

    let mut warnings = Vec::new();
    if run.corpus.is_none() && run.counts.is_none() {
        warnings.push(
            "no corpus or counts file given; plausibility filtering sees zero counts".to_string(),
        );
    }
    if agreement.instances.is_empty() {
        warnings.push(
            "agreement dataset is empty; lower --min-freq or check the paradigm file".to_string(),
        );
    }
    if translation.values().all(Vec::is_empty) {
        warnings.push("translation dataset is empty; lower --min-freq".to_string());
    }
    print_warnings(&warnings);

    prepare_out_dir(&run.out)?;
    save_agreement_dataset(&agreement, run.out.join("agreement.tsv"))?;
    save_translation_dataset(&translation, run.out.join("translation.tsv"))?;
    let stats = BuildStats {
        paradigms: paradigms.len(),
        counted_pairs: counts.len(),
        agreement_instances: agreement.instances.len(),
        positive_fraction: agreement.positive_fraction,
        translation_pairs: translation.iter().map(|(tense, pairs)| (*tense, pairs.len())).collect(),
        warnings,
    };
    write_json(
        &run.out.join("stats.json"),
        &Report { toolkit_version: version(), config: manifest, report: &stats },
    )?;
    println!(
        "build-data: {} agreement instances ({:.4} positive), {} translation pairs -> {}",
        stats.agreement_instances,
        stats.positive_fraction,
        stats.translation_pairs.values().sum::<usize>(),
        run.out.display()
    );
    Ok(())
}

#[derive(Debug)]
pub(super) struct InspectRun {
    pub embeddings: PathBuf,
    pub format: SpaceFormat,
    pub tokens: Vec<String>,
    pub neighbors: usize,
}

pub(super) fn cmd_inspect(run: &InspectRun) -> Result<()> {
    let (space, warnings) = load_space(&run.embeddings, run.format)?;
    print_warnings(&warnings);
    for token in &run.tokens {
        let exclude: HashSet<String> = std::iter::once(token.clone()).collect();
        let ranked = match &space {
            Space::Dense(dense) => {
                let query = dense
                    .vector(token)
                    .ok_or_else(|| Error::UnknownToken(token.clone()))?;
                nearest_neighbors(dense, query, run.neighbors, &exclude)?
            }
            Space::Sparse(sparse) => {
                let query = sparse
                    .vector(token)
                    .ok_or_else(|| Error::UnknownToken(token.clone()))?;
                nearest_neighbors_sparse(sparse, query, run.neighbors, &exclude)?
            }
        };
        for (neighbor, score) in ranked {
            println!("{token}\t{neighbor}\t{score:.6}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probing::MeanStd;
    use std::io::Write;

    #[test]
    fn per_aux_tables_have_one_row_per_auxiliary() {
        let mut per_aux = BTreeMap::new();
        per_aux.insert("has".to_string(), MeanStd { mean: 0.9, std: 0.05, n: 10 });
        per_aux.insert("will".to_string(), MeanStd { mean: 0.75, std: 0.1, n: 8 });
        let report = AgreementReport {
            featurizer: Featurizer::Concat,
            overall: MeanStd { mean: 0.8, std: 0.1, n: 18 },
            per_aux,
            fold_accuracies: vec![0.8; 18],
            instances_used: 100,
            dropped_instances: 0,
            feature_dim: 20,
            effective_svd_k: None,
        };
        let csv = per_aux_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "auxiliary,mean_accuracy,std_accuracy,evaluations");
        assert_eq!(lines[1], "has,0.900000,0.050000,10");
        assert_eq!(lines[2], "will,0.750000,0.100000,8");
    }

    fn tense_runs() -> Vec<TenseRun> {
        let offset_experiment = OffsetExperiment {
            tense: TenseTag::PastSimple,
            mrr_mean: 1.0,
            per_set_mrr: vec![1.0, 1.0],
            seed_sets: Vec::new(),
            offsets: Vec::new(),
        };
        let nn_experiment = NnExperiment {
            tense: TenseTag::PastSimple,
            mrr_mean: 0.5,
            per_fold_mrr: vec![0.5, 0.5],
            nets: Vec::new(),
        };
        vec![TenseRun {
            tense: TenseTag::PastSimple,
            verbs_used: 10,
            query_space_size: 40,
            dropped_verbs: Vec::new(),
            dropped_query_items: 0,
            effective_svd_k: None,
            offset: Some(OffsetSection {
                experiment: offset_experiment,
                stability: Some(StabilityStats { mean_cosine: 0.875, mean_euclidean: 0.25 }),
            }),
            nn: Some(NnSection { experiment: nn_experiment, parameter_distance: 1.5 }),
        }]
    }

    #[test]
    fn stability_tables_separate_offset_and_nn_rows() {
        let csv = stability_csv(&tense_runs());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "past-simple,offset,1.000000,0.875000,0.250000,");
        assert_eq!(lines[2], "past-simple,nn,0.500000,,,1.500000");
    }

    #[test]
    fn mrr_charts_get_one_bar_per_experiment() {
        let bars = mrr_bars(&tense_runs());
        assert_eq!(bars.len(), 2);
        assert_eq!(bars[0].label, "past-simple offset");
        assert_eq!(bars[1].label, "past-simple nn");
        assert_eq!(bars[0].value, 1.0);
    }

    #[test]
    fn curve_and_rate_tables_format_fixed_precision() {
        let curve = PRCurve {
            points: vec![crate::entailment::PrPoint {
                threshold: 0.9,
                precision: 1.0,
                recall: 0.5,
            }],
            average_precision: 0.75,
        };
        assert_eq!(pr_csv(&curve), "threshold,precision,recall\n0.900000,1.000000,0.500000\n");
        let bins = vec![FpFnBin { threshold: 0.4, fp_rate: 1.0, fn_rate: 0.0 }];
        assert_eq!(fp_fn_csv(&bins), "threshold,fp_rate,fn_rate\n0.400000,1.000000,0.000000\n");
    }

    #[test]
    fn spaces_load_in_every_format() {
        let dir = tempfile::tempdir().unwrap();
        let dense = dir.path().join("dense.txt");
        let mut file = fs::File::create(&dense).unwrap();
        write!(file, "2 2\ncat 1.0 2.0\ndog 2.0 1.0\n").unwrap();
        let (space, warnings) = load_space(&dense, SpaceFormat::Word2vec).unwrap();
        assert!(!space.is_sparse());
        assert_eq!(space.len(), 2);
        assert!(warnings.is_empty());

        let sparse = dir.path().join("sparse.tsv");
        let mut file = fs::File::create(&sparse).unwrap();
        write!(file, "cat\tf0:1.0 f1:2.0\ncat\tf0:3.0\ndog\tf1:1.0\n").unwrap();
        let (space, warnings) = load_space(&sparse, SpaceFormat::Sparse).unwrap();
        assert!(space.is_sparse());
        assert_eq!(space.len(), 2);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("duplicate"));
    }
}
