//! Plain-text embedding formats.
//!
//! Dense spaces load from either word2vec text (`<count> <dim>` header, then
//! space-separated rows) or TSV (dimension inferred from the first row).
//! Sparse spaces use one line per token: `token<TAB>feature:weight ...` with
//! space-separated pairs. All parse errors carry 1-based line numbers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{DenseEmbeddingSpace, SparseEmbeddingSpace, SparseVector, Vocab};
use crate::numerics::DenseMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenseFormat {
    Word2vecText,
    Tsv,
}

/// A loaded dense space plus how many duplicate tokens were skipped
/// (first occurrence wins).
#[derive(Debug)]
pub struct DenseLoad {
    pub space: DenseEmbeddingSpace,
    pub duplicates_dropped: usize,
}

/// A loaded sparse space plus counts of skipped duplicate tokens and of
/// dropped non-positive weights.
#[derive(Debug)]
pub struct SparseLoad {
    pub space: SparseEmbeddingSpace,
    pub duplicates_dropped: usize,
    pub nonpositive_dropped: usize,
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file).lines())
}

fn parse_value(path: &Path, line: usize, raw: &str) -> Result<f64> {
    let value: f64 = raw
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid number '{raw}'")))?;
    if !value.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite value '{raw}'")));
    }
    Ok(value)
}

pub fn load_dense(path: impl AsRef<Path>, format: DenseFormat) -> Result<DenseLoad> {
    let path = path.as_ref();
    let mut vocab = Vocab::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut duplicates = 0;
    let mut dim: Option<usize> = None;
    let mut declared: Option<usize> = None;
    let mut data_rows = 0;
    let mut last_line = 0;

    for (idx, line) in open_lines(path)?.enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');

        if lineno == 1 && format == DenseFormat::Word2vecText {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let header: Option<(usize, usize)> = match fields.as_slice() {
                [count, width] => count.parse().ok().zip(width.parse().ok()),
                _ => None,
            };
            let (count, width) = header.ok_or_else(|| {
                Error::parse(path, lineno, format!("malformed header '{line}'"))
            })?;
            if width == 0 {
                return Err(Error::parse(path, lineno, "header declares zero dimensions"));
            }
            declared = Some(count);
            dim = Some(width);
            continue;
        }

        let (token, values) = match format {
            DenseFormat::Word2vecText => {
                let mut fields = line.split_whitespace();
                let token = fields
                    .next()
                    .ok_or_else(|| Error::parse(path, lineno, "blank line"))?;
                let values: Vec<f64> = fields
                    .map(|f| parse_value(path, lineno, f))
                    .collect::<Result<_>>()?;
                (token, values)
            }
            DenseFormat::Tsv => {
                let mut fields = line.split('\t');
                let token = fields
                    .next()
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| Error::parse(path, lineno, "missing token"))?;
                let values: Vec<f64> = fields
                    .map(|f| parse_value(path, lineno, f))
                    .collect::<Result<_>>()?;
                if values.is_empty() {
                    return Err(Error::parse(path, lineno, "row has no values"));
                }
                (token, values)
            }
        };

        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected {d} values, found {}", values.len()),
                ));
            }
            Some(_) => {}
        }
        data_rows += 1;
        if vocab.contains(token) {
            duplicates += 1;
            continue;
        }
        vocab.intern(token);
        rows.push(values);
    }

    if let Some(count) = declared {
        if data_rows != count {
            return Err(Error::parse(
                path,
                last_line.max(1),
                format!("header declared {count} vectors, file contains {data_rows}"),
            ));
        }
    }
    if rows.is_empty() {
        return Err(Error::parse(path, last_line.max(1), "file contains no vectors"));
    }
    let matrix = DenseMatrix::from_rows(&rows)?;
    Ok(DenseLoad {
        space: DenseEmbeddingSpace::from_parts(vocab, matrix)?,
        duplicates_dropped: duplicates,
    })
}

pub fn save_dense(
    space: &DenseEmbeddingSpace,
    path: impl AsRef<Path>,
    format: DenseFormat,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let sep = match format {
        DenseFormat::Word2vecText => {
            writeln!(w, "{} {}", space.len(), space.dim()).map_err(|e| Error::io(path, e))?;
            ' '
        }
        DenseFormat::Tsv => '\t',
    };
    for (id, token) in space.vocab().tokens().enumerate() {
        write!(w, "{token}").map_err(|e| Error::io(path, e))?;
        for v in space.vector_by_id(id) {
            write!(w, "{sep}{v}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_sparse(path: impl AsRef<Path>) -> Result<SparseLoad> {
    let path = path.as_ref();
    let mut vocab = Vocab::new();
    let mut feature_vocab = Vocab::new();
    let mut vectors: Vec<SparseVector> = Vec::new();
    let mut duplicates = 0;
    let mut nonpositive = 0;
    let mut last_line = 0;

    for (idx, line) in open_lines(path)?.enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        let (token, rest) = line.split_once('\t').unwrap_or((line, ""));
        if token.is_empty() {
            return Err(Error::parse(path, lineno, "missing token"));
        }

        // Parse before deciding whether the line is a duplicate, so malformed
        // duplicates still fail loudly.
        let mut parsed: Vec<(&str, f64)> = Vec::new();
        for pair in rest.split_whitespace() {
            let (name, raw) = pair.rsplit_once(':').ok_or_else(|| {
                Error::parse(path, lineno, format!("malformed feature:weight pair '{pair}'"))
            })?;
            if name.is_empty() {
                return Err(Error::parse(path, lineno, format!("empty feature name in '{pair}'")));
            }
            let weight = parse_value(path, lineno, raw)?;
            if weight <= 0.0 {
                nonpositive += 1;
                continue;
            }
            parsed.push((name, weight));
        }
        if vocab.contains(token) {
            duplicates += 1;
            continue;
        }
        vocab.intern(token);
        let entries: Vec<(usize, f64)> = parsed
            .into_iter()
            .map(|(name, w)| (feature_vocab.intern(name), w))
            .collect();
        let vector = SparseVector::from_entries(entries)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        vectors.push(vector);
    }

    if vectors.is_empty() {
        return Err(Error::parse(path, last_line.max(1), "file contains no vectors"));
    }
    Ok(SparseLoad {
        space: SparseEmbeddingSpace::from_parts(vocab, feature_vocab, vectors)?,
        duplicates_dropped: duplicates,
        nonpositive_dropped: nonpositive,
    })
}

pub fn save_sparse(space: &SparseEmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, token) in space.vocab().tokens().enumerate() {
        write!(w, "{token}").map_err(|e| Error::io(path, e))?;
        for (i, &(fid, weight)) in space.vector_by_id(id).entries().iter().enumerate() {
            let name = space.feature_vocab().token(fid).unwrap();
            let sep = if i == 0 { '\t' } else { ' ' };
            write!(w, "{sep}{name}:{weight}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
