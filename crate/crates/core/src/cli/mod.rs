//! Command-line entry point: argument parsing, configuration merging, and
//! dispatch to the experiment commands.
//!
//! Settings resolve in priority order: explicit flag, then key in the
//! `--config` file (TOML `key = value` pairs named like the flags with
//! underscores), then the `TEMPO_PROBE_SEED` environment variable (seed
//! only), then built-in defaults. Exit codes: 0 on success, 1 for usage
//! and configuration problems, 2 for data problems.

mod commands;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::embeddings::Composer;
use crate::entailment::{OovPolicy, ScoreOptions, Scorer};
use crate::probing::Featurizer;
use crate::tense::TenseTag;
use crate::{Error, Result};

const DEFAULT_SEED: u64 = 42;

/// On-disk embedding format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceFormat {
    Word2vec,
    Tsv,
    Sparse,
}

impl std::str::FromStr for SpaceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec" => Ok(SpaceFormat::Word2vec),
            "tsv" => Ok(SpaceFormat::Tsv),
            "sparse" => Ok(SpaceFormat::Sparse),
            other => Err(Error::InvalidInput(format!(
                "unknown embedding format '{other}' (expected word2vec, tsv, or sparse)"
            ))),
        }
    }
}

/// Which translation experiments to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentChoice {
    Offset,
    Nn,
    Both,
}

impl ExperimentChoice {
    fn includes_offset(self) -> bool {
        matches!(self, ExperimentChoice::Offset | ExperimentChoice::Both)
    }

    fn includes_nn(self) -> bool {
        matches!(self, ExperimentChoice::Nn | ExperimentChoice::Both)
    }
}

impl std::str::FromStr for ExperimentChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "offset" => Ok(ExperimentChoice::Offset),
            "nn" => Ok(ExperimentChoice::Nn),
            "both" => Ok(ExperimentChoice::Both),
            other => Err(Error::InvalidInput(format!(
                "unknown experiment '{other}' (expected offset, nn, or both)"
            ))),
        }
    }
}

/// The fully resolved settings of one invocation, embedded in every report.
/// Fields that do not apply to the command stay null.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub embeddings: Option<PathBuf>,
    pub format: Option<SpaceFormat>,
    pub dataset: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub paradigms: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub counts: Option<PathBuf>,
    pub featurizer: Option<Featurizer>,
    pub composer: Option<Composer>,
    pub scorer: Option<Scorer>,
    pub oov: Option<OovPolicy>,
    pub content_words: Option<bool>,
    pub experiment: Option<ExperimentChoice>,
    pub tenses: Option<Vec<TenseTag>>,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub j: Option<usize>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub num_seed_sets: Option<usize>,
    pub folds: Option<usize>,
    pub hidden: Option<usize>,
    pub epochs: Option<usize>,
    pub svd_k: Option<usize>,
    pub inference_k: Option<usize>,
    pub bins: Option<usize>,
    pub neighbors: Option<usize>,
    pub min_freq: Option<u64>,
    pub implausible_max: Option<u64>,
    pub window: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn new(command: &str, seed: u64, jobs: Option<usize>) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            embeddings: None,
            format: None,
            dataset: None,
            predictions: None,
            paradigms: None,
            corpus: None,
            counts: None,
            featurizer: None,
            composer: None,
            scorer: None,
            oov: None,
            content_words: None,
            experiment: None,
            tenses: None,
            seed,
            jobs,
            j: None,
            k: None,
            n: None,
            num_seed_sets: None,
            folds: None,
            hidden: None,
            epochs: None,
            svd_k: None,
            inference_k: None,
            bins: None,
            neighbors: None,
            min_freq: None,
            implausible_max: None,
            window: None,
            out: None,
        }
    }
}

const ALLOWED_KEYS: &[&str] = &[
    "seed", "jobs", "embeddings", "format", "dataset", "predictions", "paradigms", "corpus",
    "counts", "featurizer", "composer", "scorer", "oov", "content_words", "experiment", "tenses",
    "j", "k", "n", "num_seed_sets", "folds", "hidden", "epochs", "svd_k", "inference_k", "bins",
    "neighbors", "min_freq", "implausible_max", "window", "out",
];

/// Flat `key = value` settings loaded from the `--config` file.
#[derive(Debug)]
struct FileConfig {
    values: toml::Table,
}

impl FileConfig {
    fn empty() -> FileConfig {
        FileConfig { values: toml::Table::new() }
    }

    fn load(path: &Path) -> Result<FileConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let values: toml::Table = text.parse().map_err(|e| {
            Error::Config(format!("cannot parse config file {}: {e}", path.display()))
        })?;
        for key in values.keys() {
            if !ALLOWED_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown config key '{key}' in {}",
                    path.display()
                )));
            }
        }
        Ok(FileConfig { values })
    }

    fn get_integer(&self, key: &str) -> Result<Option<i64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(n)) => Ok(Some(*n)),
            Some(_) => Err(Error::Config(format!("config key '{key}' must be an integer"))),
        }
    }

    fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.get_integer(key)?
            .map(|n| {
                usize::try_from(n).map_err(|_| {
                    Error::Config(format!("config key '{key}' must be non-negative"))
                })
            })
            .transpose()
    }

    fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get_integer(key)?
            .map(|n| {
                u64::try_from(n).map_err(|_| {
                    Error::Config(format!("config key '{key}' must be non-negative"))
                })
            })
            .transpose()
    }

    fn get_string(&self, key: &str) -> Result<Option<String>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Error::Config(format!("config key '{key}' must be a string"))),
        }
    }

    fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Error::Config(format!("config key '{key}' must be a boolean"))),
        }
    }

    fn get_path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.get_string(key)?.map(PathBuf::from))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tempo-probe",
    version,
    about = "Probe word embeddings for tense and aspect: agreement classification, \
             tense translation, and temporal entailment"
)]
struct Cli {
    /// TOML key=value config file; explicit flags win over its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every randomized stage (falls back to TEMPO_PROBE_SEED, then 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum parallel worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probe auxiliary-verb agreement with a logistic diagnostic classifier.
    Agreement(AgreementArgs),
    /// Translate lemma vectors across tenses and rank the generated vectors.
    Translate(TranslateArgs),
    /// Score temporal entailment pairs and evaluate the ranking.
    Entail(EntailArgs),
    /// Build agreement and translation datasets from paradigms and counts.
    BuildData(BuildDataArgs),
    /// Print nearest neighbors for probe tokens.
    InspectEmbeddings(InspectArgs),
}

#[derive(Debug, Args)]
struct AgreementArgs {
    /// Embedding file.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Embedding format: word2vec, tsv, or sparse.
    #[arg(long)]
    format: Option<String>,
    /// Agreement dataset TSV.
    #[arg(long, value_name = "FILE")]
    dataset: Option<PathBuf>,
    /// Feature construction: concat or compose.
    #[arg(long)]
    featurizer: Option<String>,
    /// Cross-validation repeats.
    #[arg(long)]
    j: Option<usize>,
    /// Cross-validation folds per repeat.
    #[arg(long)]
    k: Option<usize>,
    /// Projection dimension for sparse spaces.
    #[arg(long)]
    svd_k: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TranslateArgs {
    /// Embedding file.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Embedding format: word2vec, tsv, or sparse.
    #[arg(long)]
    format: Option<String>,
    /// Translation dataset TSV.
    #[arg(long, value_name = "FILE")]
    dataset: Option<PathBuf>,
    /// Which experiments to run: offset, nn, or both.
    #[arg(long)]
    experiment: Option<String>,
    /// Comma-separated tenses to evaluate (default: all with data).
    #[arg(long)]
    tenses: Option<String>,
    /// Seed verbs per seed set.
    #[arg(long)]
    n: Option<usize>,
    /// Number of held-out seed sets for the offset experiment.
    #[arg(long)]
    num_seed_sets: Option<usize>,
    /// Cross-validation folds for the network experiment.
    #[arg(long)]
    folds: Option<usize>,
    /// Hidden layer width of the translation network.
    #[arg(long)]
    hidden: Option<usize>,
    /// Training epochs of the translation network.
    #[arg(long)]
    epochs: Option<usize>,
    /// Projection dimension for sparse spaces.
    #[arg(long)]
    svd_k: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntailArgs {
    /// Embedding file.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Embedding format: word2vec, tsv, or sparse.
    #[arg(long)]
    format: Option<String>,
    /// Annotated sentence-pair TSV.
    #[arg(long, value_name = "FILE")]
    dataset: Option<PathBuf>,
    /// External predictions TSV (id, score) to evaluate against the pairs.
    #[arg(long, value_name = "FILE")]
    predictions: Option<PathBuf>,
    /// Similarity measure: cosine or binc.
    #[arg(long)]
    scorer: Option<String>,
    /// Sentence composition: additive or intersective (default suits the space).
    #[arg(long)]
    composer: Option<String>,
    /// Enrich content tokens with this many nearest neighbors before composing.
    #[arg(long)]
    inference_k: Option<usize>,
    /// Out-of-vocabulary handling: skip or error.
    #[arg(long)]
    oov: Option<String>,
    /// Compose content words only, dropping function words.
    #[arg(long)]
    content_words: bool,
    /// Threshold bins for the false-positive/false-negative sweep.
    #[arg(long)]
    bins: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildDataArgs {
    /// Verb paradigm TSV.
    #[arg(long, value_name = "FILE")]
    paradigms: Option<PathBuf>,
    /// Plain-text corpus to count auxiliary-verb pairs from.
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Precomputed pair-count TSV to merge in.
    #[arg(long, value_name = "FILE")]
    counts: Option<PathBuf>,
    /// Tokens after an auxiliary to count as candidate pairs.
    #[arg(long)]
    window: Option<usize>,
    /// Minimum form frequency for dataset inclusion.
    #[arg(long)]
    min_freq: Option<u64>,
    /// Corpus count at which a negative pair is discarded as plausible.
    #[arg(long)]
    implausible_max: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// Embedding file.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Embedding format: word2vec, tsv, or sparse.
    #[arg(long)]
    format: Option<String>,
    /// Probe token (repeatable).
    #[arg(long = "token", value_name = "TOKEN")]
    tokens: Vec<String>,
    /// Neighbors to print per probe.
    #[arg(long)]
    neighbors: Option<usize>,
}

fn parse_setting<T>(value: Option<String>) -> Result<Option<T>>
where
    T: std::str::FromStr<Err = Error>,
{
    value
        .map(|raw| raw.parse::<T>().map_err(|e| Error::Config(e.to_string())))
        .transpose()
}

fn require_path(value: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value.ok_or_else(|| {
        Error::Config(format!("--{flag} is required (pass the flag or set '{}' in the config file)", flag.replace('-', "_")))
    })
}

fn parse_tenses(value: Option<String>) -> Result<Option<Vec<TenseTag>>> {
    let Some(raw) = value else { return Ok(None) };
    let mut tenses = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        tenses.push(part.parse::<TenseTag>().map_err(|e| Error::Config(e.to_string()))?);
    }
    if tenses.is_empty() {
        return Err(Error::Config("--tenses needs at least one tense".into()));
    }
    Ok(Some(tenses))
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Some(seed) = file.get_u64("seed")? {
        return Ok(seed);
    }
    match std::env::var("TEMPO_PROBE_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            Error::Config(format!("TEMPO_PROBE_SEED must be an unsigned integer, got '{raw}'"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(Error::Config(format!("cannot read TEMPO_PROBE_SEED: {e}"))),
    }
}

fn resolve_agreement(
    args: AgreementArgs,
    file: &FileConfig,
    seed: u64,
    jobs: Option<usize>,
) -> Result<(commands::AgreementRun, RunConfig)> {
    let run = commands::AgreementRun {
        embeddings: require_path(args.embeddings.or(file.get_path("embeddings")?), "embeddings")?,
        format: parse_setting(args.format.or(file.get_string("format")?))?
            .unwrap_or(SpaceFormat::Word2vec),
        dataset: require_path(args.dataset.or(file.get_path("dataset")?), "dataset")?,
        featurizer: parse_setting(args.featurizer.or(file.get_string("featurizer")?))?
            .unwrap_or(Featurizer::Concat),
        j: args.j.or(file.get_usize("j")?).unwrap_or(5),
        k: args.k.or(file.get_usize("k")?).unwrap_or(10),
        svd_k: args.svd_k.or(file.get_usize("svd_k")?),
        seed,
        out: args.out.or(file.get_path("out")?).unwrap_or_else(|| PathBuf::from("out")),
    };
    let manifest = RunConfig {
        embeddings: Some(run.embeddings.clone()),
        format: Some(run.format),
        dataset: Some(run.dataset.clone()),
        featurizer: Some(run.featurizer),
        j: Some(run.j),
        k: Some(run.k),
        svd_k: run.svd_k,
        out: Some(run.out.clone()),
        ..RunConfig::new("agreement", seed, jobs)
    };
    Ok((run, manifest))
}

fn resolve_translate(
    args: TranslateArgs,
    file: &FileConfig,
    seed: u64,
    jobs: Option<usize>,
) -> Result<(commands::TranslateRun, RunConfig)> {
    let run = commands::TranslateRun {
        embeddings: require_path(args.embeddings.or(file.get_path("embeddings")?), "embeddings")?,
        format: parse_setting(args.format.or(file.get_string("format")?))?
            .unwrap_or(SpaceFormat::Word2vec),
        dataset: require_path(args.dataset.or(file.get_path("dataset")?), "dataset")?,
        experiment: parse_setting(args.experiment.or(file.get_string("experiment")?))?
            .unwrap_or(ExperimentChoice::Both),
        tenses: parse_tenses(args.tenses.or(file.get_string("tenses")?))?,
        n: args.n.or(file.get_usize("n")?).unwrap_or(10),
        num_seed_sets: args.num_seed_sets.or(file.get_usize("num_seed_sets")?).unwrap_or(10),
        folds: args.folds.or(file.get_usize("folds")?).unwrap_or(5),
        hidden: args.hidden.or(file.get_usize("hidden")?).unwrap_or(100),
        epochs: args.epochs.or(file.get_usize("epochs")?).unwrap_or(200),
        svd_k: args.svd_k.or(file.get_usize("svd_k")?),
        seed,
        out: args.out.or(file.get_path("out")?).unwrap_or_else(|| PathBuf::from("out")),
    };
    let manifest = RunConfig {
        embeddings: Some(run.embeddings.clone()),
        format: Some(run.format),
        dataset: Some(run.dataset.clone()),
        experiment: Some(run.experiment),
        tenses: run.tenses.clone(),
        n: Some(run.n),
        num_seed_sets: Some(run.num_seed_sets),
        folds: Some(run.folds),
        hidden: Some(run.hidden),
        epochs: Some(run.epochs),
        svd_k: run.svd_k,
        out: Some(run.out.clone()),
        ..RunConfig::new("translate", seed, jobs)
    };
    Ok((run, manifest))
}

fn resolve_entail(
    args: EntailArgs,
    file: &FileConfig,
    seed: u64,
    jobs: Option<usize>,
) -> Result<(commands::EntailRun, RunConfig)> {
    let format: SpaceFormat = parse_setting(args.format.or(file.get_string("format")?))?
        .unwrap_or(SpaceFormat::Word2vec);
    let composer: Composer = match parse_setting(args.composer.or(file.get_string("composer")?))? {
        Some(composer) => composer,
        None if format == SpaceFormat::Sparse => Composer::Intersective,
        None => Composer::Additive,
    };
    let options = ScoreOptions {
        scorer: parse_setting(args.scorer.or(file.get_string("scorer")?))?.unwrap_or(Scorer::Cosine),
        composer,
        inference_k: args.inference_k.or(file.get_usize("inference_k")?).unwrap_or(0),
        oov_policy: parse_setting(args.oov.or(file.get_string("oov")?))?.unwrap_or(OovPolicy::Skip),
        content_words_only: args.content_words || file.get_bool("content_words")?.unwrap_or(false),
    };
    let run = commands::EntailRun {
        embeddings: require_path(args.embeddings.or(file.get_path("embeddings")?), "embeddings")?,
        format,
        dataset: require_path(args.dataset.or(file.get_path("dataset")?), "dataset")?,
        predictions: args.predictions.or(file.get_path("predictions")?),
        options,
        bins: args.bins.or(file.get_usize("bins")?).unwrap_or(10),
        out: args.out.or(file.get_path("out")?).unwrap_or_else(|| PathBuf::from("out")),
    };
    let manifest = RunConfig {
        embeddings: Some(run.embeddings.clone()),
        format: Some(run.format),
        dataset: Some(run.dataset.clone()),
        predictions: run.predictions.clone(),
        composer: Some(run.options.composer),
        scorer: Some(run.options.scorer),
        oov: Some(run.options.oov_policy),
        content_words: Some(run.options.content_words_only),
        inference_k: Some(run.options.inference_k),
        bins: Some(run.bins),
        out: Some(run.out.clone()),
        ..RunConfig::new("entail", seed, jobs)
    };
    Ok((run, manifest))
}

fn resolve_build_data(
    args: BuildDataArgs,
    file: &FileConfig,
    seed: u64,
    jobs: Option<usize>,
) -> Result<(commands::BuildDataRun, RunConfig)> {
    let window = args.window.or(file.get_usize("window")?).unwrap_or(2);
    if window == 0 {
        return Err(Error::Config("--window must be at least 1".into()));
    }
    let run = commands::BuildDataRun {
        paradigms: require_path(args.paradigms.or(file.get_path("paradigms")?), "paradigms")?,
        corpus: args.corpus.or(file.get_path("corpus")?),
        counts: args.counts.or(file.get_path("counts")?),
        window,
        min_freq: args.min_freq.or(file.get_u64("min_freq")?).unwrap_or(50),
        implausible_max: args
            .implausible_max
            .or(file.get_u64("implausible_max")?)
            .unwrap_or(1),
        out: args.out.or(file.get_path("out")?).unwrap_or_else(|| PathBuf::from("out")),
    };
    let manifest = RunConfig {
        paradigms: Some(run.paradigms.clone()),
        corpus: run.corpus.clone(),
        counts: run.counts.clone(),
        window: Some(run.window),
        min_freq: Some(run.min_freq),
        implausible_max: Some(run.implausible_max),
        out: Some(run.out.clone()),
        ..RunConfig::new("build-data", seed, jobs)
    };
    Ok((run, manifest))
}

fn resolve_inspect(args: InspectArgs, file: &FileConfig) -> Result<commands::InspectRun> {
    if args.tokens.is_empty() {
        return Err(Error::Config("at least one --token is required".into()));
    }
    let neighbors = args.neighbors.or(file.get_usize("neighbors")?).unwrap_or(10);
    if neighbors == 0 {
        return Err(Error::Config("--neighbors must be at least 1".into()));
    }
    Ok(commands::InspectRun {
        embeddings: require_path(args.embeddings.or(file.get_path("embeddings")?), "embeddings")?,
        format: parse_setting(args.format.or(file.get_string("format")?))?
            .unwrap_or(SpaceFormat::Word2vec),
        tokens: args.tokens,
        neighbors,
    })
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::empty(),
    };
    let seed = resolve_seed(cli.seed, &file)?;
    let jobs = match cli.jobs {
        Some(n) => Some(n),
        None => file.get_usize("jobs")?,
    };
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot limit workers to {jobs} threads: {e}")))?;
    }
    match cli.command {
        Command::Agreement(args) => {
            let (run, manifest) = resolve_agreement(args, &file, seed, jobs)?;
            commands::cmd_agreement(&run, &manifest)
        }
        Command::Translate(args) => {
            let (run, manifest) = resolve_translate(args, &file, seed, jobs)?;
            commands::cmd_translate(&run, &manifest)
        }
        Command::Entail(args) => {
            let (run, manifest) = resolve_entail(args, &file, seed, jobs)?;
            commands::cmd_entail(&run, &manifest)
        }
        Command::BuildData(args) => {
            let (run, manifest) = resolve_build_data(args, &file, seed, jobs)?;
            commands::cmd_build_data(&run, &manifest)
        }
        Command::InspectEmbeddings(args) => {
            let run = resolve_inspect(args, &file)?;
            commands::cmd_inspect(&run)
        }
    }
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Config(_) => 1,
        _ => 2,
    }
}

/// Parses arguments and runs the selected command, translating errors into
/// the documented exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
