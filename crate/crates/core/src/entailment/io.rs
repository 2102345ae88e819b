//! Tab-separated formats for annotated pairs and external predictions.
//!
//! - Pairs: `id<TAB>premise<TAB>hypothesis<TAB>premise_tense<TAB>hypothesis_tense<TAB>label`
//!   with space-separated sentence tokens.
//! - Predictions: `id<TAB>score` with scores in [0, 1].

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{EntailmentLabel, TeaExample};
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

fn sentence_tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub fn load_tea(path: impl AsRef<Path>) -> Result<Vec<TeaExample>> {
    let path = path.as_ref();
    let mut examples = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in read_lines(path)? {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, premise, hypothesis, premise_tense, hypothesis_tense, label]: [&str; 6] =
            fields.as_slice().try_into().map_err(|_| {
                Error::parse(
                    path,
                    lineno,
                    format!("expected 6 tab-separated fields, found {}", fields.len()),
                )
            })?;
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(path, lineno, format!("duplicate id '{id}'")));
        }
        let premise_tense: TenseTag = premise_tense
            .parse()
            .map_err(|e: Error| Error::parse(path, lineno, e.to_string()))?;
        let hypothesis_tense: TenseTag = hypothesis_tense
            .parse()
            .map_err(|e: Error| Error::parse(path, lineno, e.to_string()))?;
        let label: EntailmentLabel = label
            .parse()
            .map_err(|e: Error| Error::parse(path, lineno, e.to_string()))?;
        let example = TeaExample::new(
            id.to_string(),
            sentence_tokens(premise),
            sentence_tokens(hypothesis),
            premise_tense,
            hypothesis_tense,
            label,
        )
        .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        examples.push(example);
    }
    Ok(examples)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let mut predictions = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in read_lines(path)? {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, raw_score]: [&str; 2] = fields.as_slice().try_into().map_err(|_| {
            Error::parse(
                path,
                lineno,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            )
        })?;
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(path, lineno, format!("duplicate id '{id}'")));
        }
        let score: f64 = raw_score.parse().map_err(|_| {
            Error::parse(path, lineno, format!("invalid score '{raw_score}'"))
        })?;
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(Error::parse(
                path,
                lineno,
                format!("score {raw_score} is outside [0, 1]"),
            ));
        }
        predictions.push((id.to_string(), score));
    }
    Ok(predictions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut file = File::create(&path).unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn pair_files_load_with_tokenized_sentences() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "pairs.tsv",
            "e1\tthe dog barked\tthe dog barks\tpast-simple\tpresent-simple\tnon-entailment\n\
             e2\tshe has visited rome\tshe visited rome\tpresent-perfect\tpast-simple\tentailment\n\
             \n\
             e3\tit will rain\tit rains\tmodal-future\tpresent-simple\tnon-entailment\n",
        );
        let examples = load_tea(&path).unwrap();
        assert_eq!(examples.len(), 3);
        assert_eq!(examples[0].id, "e1");
        assert_eq!(examples[0].premise, vec!["the", "dog", "barked"]);
        assert_eq!(examples[1].hypothesis, vec!["she", "visited", "rome"]);
        assert_eq!(examples[1].premise_tense, TenseTag::PresentPerfect);
        assert_eq!(examples[1].label, EntailmentLabel::Entailment);
        assert_eq!(examples[2].hypothesis_tense, TenseTag::PresentSimple);
    }

    #[test]
    fn malformed_pair_lines_are_reported_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let bad_tense = write_file(
            &dir,
            "tense.tsv",
            "e1\ta b\tc d\tpast-simple\tpresent-simple\tentailment\n\
             e2\ta b\tc d\tfuture-pluperfect\tpresent-simple\tentailment\n",
        );
        let message = load_tea(&bad_tense).unwrap_err().to_string();
        assert!(message.contains(":2:"), "unexpected message: {message}");
        assert!(message.contains("unknown tense"), "unexpected message: {message}");

        let bad_fields = write_file(&dir, "fields.tsv", "e1\tonly\tthree fields\n");
        let message = load_tea(&bad_fields).unwrap_err().to_string();
        assert!(message.contains("expected 6 tab-separated fields"));

        let empty_sentence = write_file(
            &dir,
            "empty.tsv",
            "e1\t \tc d\tpast-simple\tpresent-simple\tentailment\n",
        );
        let message = load_tea(&empty_sentence).unwrap_err().to_string();
        assert!(message.contains("empty premise"), "unexpected message: {message}");

        let duplicate = write_file(
            &dir,
            "dup.tsv",
            "e1\ta b\tc d\tpast-simple\tpresent-simple\tentailment\n\
             e1\ta b\tc d\tpast-simple\tpresent-simple\tentailment\n",
        );
        let message = load_tea(&duplicate).unwrap_err().to_string();
        assert!(message.contains("duplicate id 'e1'"));
        assert!(message.contains(":2:"));

        let bad_label = write_file(
            &dir,
            "label.tsv",
            "e1\ta b\tc d\tpast-simple\tpresent-simple\tmaybe\n",
        );
        let message = load_tea(&bad_label).unwrap_err().to_string();
        assert!(message.contains("unknown label 'maybe'"));
    }

    #[test]
    fn prediction_files_validate_their_scores() {
        let dir = tempfile::tempdir().unwrap();
        let good = write_file(&dir, "good.tsv", "e1\t0.75\n\ne2\t0\ne3\t1.0\n");
        let predictions = load_predictions(&good).unwrap();
        assert_eq!(predictions.len(), 3);
        assert_eq!(predictions[0], ("e1".to_string(), 0.75));
        assert_eq!(predictions[1].1, 0.0);

        let out_of_range = write_file(&dir, "range.tsv", "e1\t1.5\n");
        let message = load_predictions(&out_of_range).unwrap_err().to_string();
        assert!(message.contains("outside [0, 1]"));
        assert!(message.contains(":1:"));

        let not_a_number = write_file(&dir, "nan.tsv", "e1\thigh\n");
        let message = load_predictions(&not_a_number).unwrap_err().to_string();
        assert!(message.contains("invalid score 'high'"));

        let duplicated = write_file(&dir, "dup.tsv", "e1\t0.5\ne1\t0.6\n");
        let message = load_predictions(&duplicated).unwrap_err().to_string();
        assert!(message.contains("duplicate id 'e1'"));

        let wrong_fields = write_file(&dir, "fields.tsv", "e1 0.5\n");
        let message = load_predictions(&wrong_fields).unwrap_err().to_string();
        assert!(message.contains("expected 2 tab-separated fields"));
    }
}
