//! Corpus ingestion and dataset construction.
//!
//! Builds two resources from verb paradigms and auxiliary-verb co-occurrence
//! counts: an agreement dataset of plausible vs. implausible auxiliary +
//! inflected-verb pairs, and a translation dataset mapping each tense to
//! (lemma, target tokens) pairs.

mod io;

pub use io::{
    load_agreement_dataset, load_counts, load_paradigms, load_translation_dataset,
    save_agreement_dataset, save_counts, save_translation_dataset,
};

use std::collections::{BTreeMap, HashSet};

use crate::tense::{InflectionClass, TenseTag};
use crate::{Error, Result};

/// Auxiliary paradigms and the verb inflection each one licenses.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum AuxParadigm {
    ModalFuture,
    Perfect,
    Progressive,
}

impl AuxParadigm {
    pub fn required_form(self) -> InflectionClass {
        match self {
            AuxParadigm::ModalFuture => InflectionClass::Infinitive,
            AuxParadigm::Perfect => InflectionClass::PastParticiple,
            AuxParadigm::Progressive => InflectionClass::PresentParticiple,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AuxParadigm::ModalFuture => "modal-future",
            AuxParadigm::Perfect => "perfect",
            AuxParadigm::Progressive => "progressive",
        }
    }
}

/// The auxiliary surface forms under study, each tagged with its paradigm.
/// Iteration order is insertion order, so downstream results are stable.
#[derive(Debug, Clone)]
pub struct AuxInventory {
    entries: Vec<(String, AuxParadigm)>,
}

impl AuxInventory {
    /// will | have/has/had | am/is/are/was/were — no do-support forms.
    pub fn default_inventory() -> Self {
        let mut entries = vec![("will".to_string(), AuxParadigm::ModalFuture)];
        for f in ["have", "has", "had"] {
            entries.push((f.to_string(), AuxParadigm::Perfect));
        }
        for f in ["am", "is", "are", "was", "were"] {
            entries.push((f.to_string(), AuxParadigm::Progressive));
        }
        AuxInventory { entries }
    }

    pub fn from_entries(entries: Vec<(String, AuxParadigm)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("auxiliary inventory is empty".into()));
        }
        let mut seen = HashSet::new();
        for (form, _) in &entries {
            if !seen.insert(form.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate auxiliary form '{form}'"
                )));
            }
        }
        Ok(AuxInventory { entries })
    }

    pub fn paradigm_of(&self, surface: &str) -> Option<AuxParadigm> {
        self.entries
            .iter()
            .find(|(form, _)| form == surface)
            .map(|&(_, p)| p)
    }

    pub fn forms(&self) -> impl Iterator<Item = (&str, AuxParadigm)> {
        self.entries.iter().map(|&(ref form, p)| (form.as_str(), p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for AuxInventory {
    fn default() -> Self {
        AuxInventory::default_inventory()
    }
}

/// A verb's five inflection slots with per-form corpus frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbParadigm {
    lemma: String,
    forms: [(String, u64); 5],
}

impl VerbParadigm {
    /// `forms` follows [`InflectionClass::ALL`] order: infinitive, 3sg, past,
    /// past participle, present participle.
    pub fn new(lemma: impl Into<String>, forms: [(String, u64); 5]) -> Result<Self> {
        let lemma = lemma.into();
        if lemma.is_empty() {
            return Err(Error::InvalidInput("paradigm lemma is empty".into()));
        }
        if forms.iter().any(|(s, _)| s.is_empty()) {
            return Err(Error::InvalidInput(format!(
                "paradigm for '{lemma}' has an empty surface form"
            )));
        }
        Ok(VerbParadigm { lemma, forms })
    }

    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    pub fn form(&self, class: InflectionClass) -> &str {
        &self.forms[class.index()].0
    }

    pub fn freq(&self, class: InflectionClass) -> u64 {
        self.forms[class.index()].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlausibilityLabel {
    Plausible,
    Implausible,
}

impl PlausibilityLabel {
    pub fn is_plausible(self) -> bool {
        self == PlausibilityLabel::Plausible
    }

    pub fn name(self) -> &'static str {
        match self {
            PlausibilityLabel::Plausible => "plausible",
            PlausibilityLabel::Implausible => "implausible",
        }
    }
}

impl std::str::FromStr for PlausibilityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plausible" => Ok(PlausibilityLabel::Plausible),
            "implausible" => Ok(PlausibilityLabel::Implausible),
            other => Err(Error::InvalidInput(format!("unknown label '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxVerbInstance {
    pub auxiliary: String,
    pub verb_form: String,
    pub lemma: String,
    pub label: PlausibilityLabel,
    pub corpus_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementDataset {
    pub instances: Vec<AuxVerbInstance>,
    pub positive_fraction: f64,
}

impl AgreementDataset {
    pub fn from_instances(instances: Vec<AuxVerbInstance>) -> Self {
        let positives = instances.iter().filter(|i| i.label.is_plausible()).count();
        let positive_fraction = if instances.is_empty() {
            0.0
        } else {
            positives as f64 / instances.len() as f64
        };
        AgreementDataset {
            instances,
            positive_fraction,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Co-occurrence table keyed by (auxiliary, following token).
pub type PairCounts = BTreeMap<(String, String), u64>;

/// Counts every token occurring strictly after an inventory auxiliary and at
/// most `window` positions away. No part-of-speech knowledge is applied, so
/// intervening adverbs and other non-verbs are counted too; consumers look up
/// only the (auxiliary, verb-form) pairs they care about.
pub fn count_pairs<'a>(
    tokens: impl IntoIterator<Item = &'a str>,
    inventory: &AuxInventory,
    window: usize,
) -> Result<PairCounts> {
    if window == 0 {
        return Err(Error::InvalidInput("window must be at least 1".into()));
    }
    let tokens: Vec<&str> = tokens.into_iter().collect();
    let mut counts = PairCounts::new();
    for (i, tok) in tokens.iter().enumerate() {
        if inventory.paradigm_of(tok).is_none() {
            continue;
        }
        for following in tokens.iter().skip(i + 1).take(window) {
            *counts
                .entry((tok.to_string(), following.to_string()))
                .or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// Sums `from` into `into`, for sharded counting.
pub fn merge_counts(into: &mut PairCounts, from: PairCounts) {
    for (key, n) in from {
        *into.entry(key).or_insert(0) += n;
    }
}

/// Builds the agreement dataset.
///
/// Positives pair each auxiliary with the inflection slot its paradigm
/// licenses; negatives cross it with every other eligible slot. A negative is
/// discarded when its surface form is licensed after all (past/past-participle
/// homographs such as "has visited"), when it forms a valid passive
/// (be-paradigm auxiliary + past-participle surface), or when the corpus
/// attests the combination at least `implausible_max` times.
pub fn build_agreement_dataset(
    paradigms: &[VerbParadigm],
    counts: &PairCounts,
    inventory: &AuxInventory,
    min_verb_freq: u64,
    implausible_max: u64,
) -> AgreementDataset {
    let mut instances = Vec::new();
    for verb in paradigms {
        for (aux, paradigm) in inventory.forms() {
            let required = paradigm.required_form();
            let licensed = verb.form(required);
            let lookup = |surface: &str| {
                counts
                    .get(&(aux.to_string(), surface.to_string()))
                    .copied()
                    .unwrap_or(0)
            };
            if verb.freq(required) >= min_verb_freq {
                instances.push(AuxVerbInstance {
                    auxiliary: aux.to_string(),
                    verb_form: licensed.to_string(),
                    lemma: verb.lemma().to_string(),
                    label: PlausibilityLabel::Plausible,
                    corpus_count: lookup(licensed),
                });
            }
            let mut seen: HashSet<&str> = HashSet::new();
            for slot in InflectionClass::ALL {
                if slot == required {
                    continue;
                }
                let surface = verb.form(slot);
                if verb.freq(slot) < min_verb_freq
                    || surface == licensed
                    || !seen.insert(surface)
                {
                    continue;
                }
                let passive = paradigm == AuxParadigm::Progressive
                    && surface == verb.form(InflectionClass::PastParticiple);
                if passive {
                    continue;
                }
                let corpus_count = lookup(surface);
                if corpus_count >= implausible_max {
                    continue;
                }
                instances.push(AuxVerbInstance {
                    auxiliary: aux.to_string(),
                    verb_form: surface.to_string(),
                    lemma: verb.lemma().to_string(),
                    label: PlausibilityLabel::Implausible,
                    corpus_count,
                });
            }
        }
    }
    AgreementDataset::from_instances(instances)
}

/// One lemma → target mapping for tense translation. The target is the
/// inflected surface form, preceded by the tense's canonical auxiliary when
/// one is required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationPair {
    pub lemma: String,
    pub target: Vec<String>,
}

/// Per-tense translation pairs; all seven tenses are always present as keys.
pub type TranslationDataset = BTreeMap<TenseTag, Vec<TranslationPair>>;

pub fn build_translation_dataset(paradigms: &[VerbParadigm], min_freq: u64) -> TranslationDataset {
    let mut out: TranslationDataset = TenseTag::ALL.into_iter().map(|t| (t, Vec::new())).collect();
    for verb in paradigms {
        for tense in TenseTag::ALL {
            let slot = tense.verb_form();
            if verb.freq(slot) < min_freq {
                continue;
            }
            let mut target = Vec::new();
            if let Some(aux) = tense.auxiliary() {
                target.push(aux.to_string());
            }
            target.push(verb.form(slot).to_string());
            out.get_mut(&tense).unwrap().push(TranslationPair {
                lemma: verb.lemma().to_string(),
                target,
            });
        }
    }
    out
}
