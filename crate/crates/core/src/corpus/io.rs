//! Tab-separated formats for paradigms, pair counts, and the two datasets.
//!
//! - Paradigms: `lemma<TAB>infinitive:freq<TAB>3sg:freq<TAB>past:freq<TAB>pastpart:freq<TAB>prespart:freq`
//! - Counts: `aux<TAB>verb_form<TAB>count`
//! - Agreement dataset: `aux<TAB>verb_form<TAB>lemma<TAB>label`
//! - Translation dataset: `tense<TAB>lemma<TAB>space-joined target tokens`

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{
    AgreementDataset, AuxVerbInstance, PairCounts, TranslationDataset, TranslationPair,
    VerbParadigm,
};
use crate::tense::TenseTag;
use crate::{Error, Result};

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        lines.push((idx + 1, line.trim_end_matches('\r').to_string()));
    }
    Ok(lines)
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split('\t').collect()
}

pub fn load_paradigms(path: impl AsRef<Path>) -> Result<Vec<VerbParadigm>> {
    let path = path.as_ref();
    let mut paradigms = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in read_lines(path)? {
        if line.is_empty() {
            continue;
        }
        let fields = split_fields(&line);
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 6 tab-separated fields, found {}", fields.len()),
            ));
        }
        let lemma = fields[0];
        if !seen.insert(lemma.to_string()) {
            return Err(Error::parse(path, lineno, format!("duplicate lemma '{lemma}'")));
        }
        let mut forms: Vec<(String, u64)> = Vec::with_capacity(5);
        for field in &fields[1..] {
            let (surface, raw_freq) = field.rsplit_once(':').ok_or_else(|| {
                Error::parse(path, lineno, format!("malformed form:freq field '{field}'"))
            })?;
            let freq: u64 = raw_freq.parse().map_err(|_| {
                Error::parse(path, lineno, format!("invalid frequency '{raw_freq}'"))
            })?;
            forms.push((surface.to_string(), freq));
        }
        let forms: [(String, u64); 5] = forms.try_into().expect("five fields checked above");
        let paradigm = VerbParadigm::new(lemma, forms)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        paradigms.push(paradigm);
    }
    Ok(paradigms)
}

pub fn load_counts(path: impl AsRef<Path>) -> Result<PairCounts> {
    let path = path.as_ref();
    let mut counts = PairCounts::new();
    for (lineno, line) in read_lines(path)? {
        if line.is_empty() {
            continue;
        }
        let fields = split_fields(&line);
        let [aux, verb_form, raw]: [&str; 3] = fields.as_slice().try_into().map_err(|_| {
            Error::parse(
                path,
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            )
        })?;
        let n: u64 = raw
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("invalid count '{raw}'")))?;
        *counts
            .entry((aux.to_string(), verb_form.to_string()))
            .or_insert(0) += n;
    }
    Ok(counts)
}

pub fn save_counts(counts: &PairCounts, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for ((aux, verb_form), n) in counts {
        writeln!(w, "{aux}\t{verb_form}\t{n}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads an agreement dataset. Corpus counts are not stored in this format,
/// so reloaded instances carry `corpus_count` 0; the positive fraction is
/// recomputed from the labels.
pub fn load_agreement_dataset(path: impl AsRef<Path>) -> Result<AgreementDataset> {
    let path = path.as_ref();
    let mut instances = Vec::new();
    for (lineno, line) in read_lines(path)? {
        if line.is_empty() {
            continue;
        }
        let fields = split_fields(&line);
        let [aux, verb_form, lemma, label]: [&str; 4] =
            fields.as_slice().try_into().map_err(|_| {
                Error::parse(
                    path,
                    lineno,
                    format!("expected 4 tab-separated fields, found {}", fields.len()),
                )
            })?;
        let label = label
            .parse()
            .map_err(|e: Error| Error::parse(path, lineno, e.to_string()))?;
        instances.push(AuxVerbInstance {
            auxiliary: aux.to_string(),
            verb_form: verb_form.to_string(),
            lemma: lemma.to_string(),
            label,
            corpus_count: 0,
        });
    }
    Ok(AgreementDataset::from_instances(instances))
}

pub fn save_agreement_dataset(dataset: &AgreementDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for inst in &dataset.instances {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            inst.auxiliary,
            inst.verb_form,
            inst.lemma,
            inst.label.name()
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_translation_dataset(path: impl AsRef<Path>) -> Result<TranslationDataset> {
    let path = path.as_ref();
    let mut dataset: TranslationDataset =
        TenseTag::ALL.into_iter().map(|t| (t, Vec::new())).collect();
    for (lineno, line) in read_lines(path)? {
        if line.is_empty() {
            continue;
        }
        let fields = split_fields(&line);
        let [tense, lemma, target]: [&str; 3] = fields.as_slice().try_into().map_err(|_| {
            Error::parse(
                path,
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            )
        })?;
        let tense: TenseTag = tense
            .parse()
            .map_err(|e: Error| Error::parse(path, lineno, e.to_string()))?;
        let target: Vec<String> = target.split_whitespace().map(str::to_string).collect();
        if target.is_empty() {
            return Err(Error::parse(path, lineno, "empty target tokens"));
        }
        dataset.get_mut(&tense).unwrap().push(TranslationPair {
            lemma: lemma.to_string(),
            target,
        });
    }
    Ok(dataset)
}

pub fn save_translation_dataset(dataset: &TranslationDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for (tense, pairs) in dataset {
        for pair in pairs {
            writeln!(w, "{}\t{}\t{}", tense.name(), pair.lemma, pair.target.join(" "))
                .map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_agreement_dataset, build_translation_dataset, AuxInventory};
    use crate::tense::InflectionClass;

    fn paradigm_file(dir: &tempfile::TempDir) -> std::path::PathBuf {
        let path = dir.path().join("paradigms.tsv");
        std::fs::write(
            &path,
            "visit\tvisit:500\tvisits:300\tvisited:120\tvisited:80\tvisiting:90\n\
             run\trun:400\truns:200\tran:150\trun:100\trunning:130\n",
        )
        .unwrap();
        path
    }

    #[test]
    fn paradigms_load_with_positional_slots() {
        let dir = tempfile::tempdir().unwrap();
        let paradigms = load_paradigms(paradigm_file(&dir)).unwrap();
        assert_eq!(paradigms.len(), 2);
        assert_eq!(paradigms[0].lemma(), "visit");
        assert_eq!(paradigms[0].form(InflectionClass::ThirdSingular), "visits");
        assert_eq!(paradigms[0].freq(InflectionClass::PastParticiple), 80);
        assert_eq!(paradigms[1].form(InflectionClass::Past), "ran");
    }

    #[test]
    fn paradigm_parse_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let short = dir.path().join("short.tsv");
        std::fs::write(&short, "visit\tvisit:500\n").unwrap();
        let err = load_paradigms(&short).unwrap_err().to_string();
        assert!(err.contains(":1:") && err.contains("6 tab-separated"), "{err}");

        let bad_freq = dir.path().join("freq.tsv");
        std::fs::write(
            &bad_freq,
            "visit\tvisit:x\tvisits:1\tvisited:1\tvisited:1\tvisiting:1\n",
        )
        .unwrap();
        assert!(load_paradigms(&bad_freq).is_err());

        let dup = dir.path().join("dup.tsv");
        std::fs::write(
            &dup,
            "visit\tvisit:1\tvisits:1\tvisited:1\tvisited:1\tvisiting:1\n\
             visit\tvisit:2\tvisits:2\tvisited:2\tvisited:2\tvisiting:2\n",
        )
        .unwrap();
        let err = load_paradigms(&dup).unwrap_err().to_string();
        assert!(err.contains(":2:") && err.contains("duplicate lemma"), "{err}");
    }

    #[test]
    fn counts_round_trip_and_merge_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.tsv");
        std::fs::write(&path, "will\tvisit\t10\nhas\tvisited\t7\nwill\tvisit\t2\n").unwrap();
        let counts = load_counts(&path).unwrap();
        assert_eq!(counts[&("will".to_string(), "visit".to_string())], 12);

        let out = dir.path().join("copy.tsv");
        save_counts(&counts, &out).unwrap();
        assert_eq!(load_counts(&out).unwrap(), counts);

        let bad = dir.path().join("bad.tsv");
        std::fs::write(&bad, "will\tvisit\n").unwrap();
        assert!(load_counts(&bad).is_err());
    }

    #[test]
    fn agreement_dataset_round_trips_labels() {
        let dir = tempfile::tempdir().unwrap();
        let paradigms = load_paradigms(paradigm_file(&dir)).unwrap();
        let dataset = build_agreement_dataset(
            &paradigms,
            &PairCounts::new(),
            &AuxInventory::default_inventory(),
            50,
            5,
        );
        let path = dir.path().join("agreement.tsv");
        save_agreement_dataset(&dataset, &path).unwrap();
        let reloaded = load_agreement_dataset(&path).unwrap();
        assert_eq!(reloaded.len(), dataset.len());
        assert!((reloaded.positive_fraction - dataset.positive_fraction).abs() < 1e-12);
        for (a, b) in dataset.instances.iter().zip(&reloaded.instances) {
            assert_eq!(a.auxiliary, b.auxiliary);
            assert_eq!(a.verb_form, b.verb_form);
            assert_eq!(a.lemma, b.lemma);
            assert_eq!(a.label, b.label);
        }

        let bad = dir.path().join("bad.tsv");
        std::fs::write(&bad, "will\tvisit\tvisit\tmaybe\n").unwrap();
        let err = load_agreement_dataset(&bad).unwrap_err().to_string();
        assert!(err.contains(":1:") && err.contains("unknown label"), "{err}");
    }

    #[test]
    fn translation_dataset_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let paradigms = load_paradigms(paradigm_file(&dir)).unwrap();
        let dataset = build_translation_dataset(&paradigms, 50);
        let path = dir.path().join("translation.tsv");
        save_translation_dataset(&dataset, &path).unwrap();
        assert_eq!(load_translation_dataset(&path).unwrap(), dataset);

        let bad = dir.path().join("bad.tsv");
        std::fs::write(&bad, "future\tvisit\twill visit\n").unwrap();
        let err = load_translation_dataset(&bad).unwrap_err().to_string();
        assert!(err.contains("unknown tense"), "{err}");
    }
}
