//! Embedding stores and the algebra on top of them.
//!
//! Two kinds of space are supported: dense row-matrix spaces (word2vec-style)
//! and sparse feature spaces with strictly positive weights (PPMI-style).
//! Composition differs per kind — dense vectors combine by addition, sparse
//! vectors by feature intersection — and [`Composer`] names the choice so
//! configuration can carry it around.

mod io;
mod similarity;

pub use io::{load_dense, load_sparse, save_dense, save_sparse, DenseFormat, DenseLoad, SparseLoad};
pub use similarity::{
    binc, cosine, cosine_sparse, distributional_inference, distributional_inference_sparse,
    euclidean, euclidean_sparse, nearest_neighbors, nearest_neighbors_sparse,
};

use std::collections::HashMap;

use crate::numerics::{norm, DenseMatrix};
use crate::{Error, Result};

/// Bidirectional token ↔ id map with ids assigned contiguously from 0 in
/// insertion order.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Vocab::default()
    }

    /// Returns the existing id for `token`, or assigns the next free one.
    pub fn intern(&mut self, token: &str) -> usize {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in id order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

/// Dense embedding table with one row per vocabulary entry and cached row
/// norms, so repeated cosine queries avoid recomputing them.
#[derive(Debug, Clone)]
pub struct DenseEmbeddingSpace {
    vocab: Vocab,
    matrix: DenseMatrix,
    norms: Vec<f64>,
}

impl DenseEmbeddingSpace {
    pub fn from_parts(vocab: Vocab, matrix: DenseMatrix) -> Result<Self> {
        if vocab.len() != matrix.rows() {
            return Err(Error::Dimension(format!(
                "{} vocabulary entries against {} matrix rows",
                vocab.len(),
                matrix.rows()
            )));
        }
        if let Some(bad) = matrix.data().iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value in embedding row {}",
                bad / matrix.cols().max(1)
            )));
        }
        let norms = (0..matrix.rows()).map(|i| norm(matrix.row(i))).collect();
        Ok(DenseEmbeddingSpace { vocab, matrix, norms })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.id(token).map(|id| self.matrix.row(id))
    }

    pub fn vector_by_id(&self, id: usize) -> &[f64] {
        self.matrix.row(id)
    }

    pub fn norm_by_id(&self, id: usize) -> f64 {
        self.norms[id]
    }
}

/// Sparse vector: (feature-id, weight) pairs with strictly increasing ids and
/// strictly positive finite weights. The empty vector is valid — feature
/// intersection of disjoint supports produces it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn empty() -> Self {
        SparseVector::default()
    }

    /// Sorts the entries by feature id and validates the invariants.
    pub fn from_entries(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(id, _)| id);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::InvalidInput(format!(
                    "duplicate feature id {}",
                    window[0].0
                )));
            }
        }
        for &(id, w) in &entries {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "feature {id} has non-positive or non-finite weight {w}"
                )));
            }
        }
        Ok(SparseVector { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, feature: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&feature, |&(id, _)| id)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, w)| w * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Total weight mass, summed in ascending feature order.
    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }
}

impl AsRef<[(usize, f64)]> for SparseVector {
    fn as_ref(&self) -> &[(usize, f64)] {
        &self.entries
    }
}

/// Sparse embedding store: one [`SparseVector`] per vocabulary entry, with
/// feature ids interned in a second vocabulary.
#[derive(Debug, Clone)]
pub struct SparseEmbeddingSpace {
    vocab: Vocab,
    feature_vocab: Vocab,
    vectors: Vec<SparseVector>,
}

impl SparseEmbeddingSpace {
    pub fn from_parts(
        vocab: Vocab,
        feature_vocab: Vocab,
        vectors: Vec<SparseVector>,
    ) -> Result<Self> {
        if vocab.len() != vectors.len() {
            return Err(Error::Dimension(format!(
                "{} vocabulary entries against {} vectors",
                vocab.len(),
                vectors.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if let Some(&(id, _)) = v.entries().last() {
                if id >= feature_vocab.len() {
                    return Err(Error::InvalidInput(format!(
                        "vector {i} references feature id {id} outside the feature vocabulary"
                    )));
                }
            }
        }
        Ok(SparseEmbeddingSpace {
            vocab,
            feature_vocab,
            vectors,
        })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn feature_vocab(&self) -> &Vocab {
        &self.feature_vocab
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&SparseVector> {
        self.vocab.id(token).map(|id| &self.vectors[id])
    }

    pub fn vector_by_id(&self, id: usize) -> &SparseVector {
        &self.vectors[id]
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }
}

/// Either kind of embedding store, for code paths that accept both.
#[derive(Debug, Clone)]
pub enum Space {
    Dense(DenseEmbeddingSpace),
    Sparse(SparseEmbeddingSpace),
}

impl Space {
    pub fn vocab(&self) -> &Vocab {
        match self {
            Space::Dense(s) => s.vocab(),
            Space::Sparse(s) => s.vocab(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Space::Sparse(_))
    }

    pub fn len(&self) -> usize {
        self.vocab().len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab().is_empty()
    }
}

/// How two vectors combine into a contextualized form. Addition only makes
/// sense for dense spaces, intersection only for sparse ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composer {
    Additive,
    Intersective,
}

impl Composer {
    pub fn suits_dense(self) -> bool {
        self == Composer::Additive
    }

    pub fn suits_sparse(self) -> bool {
        self == Composer::Intersective
    }
}

impl std::fmt::Display for Composer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Composer::Additive => "additive",
            Composer::Intersective => "intersective",
        })
    }
}

impl std::str::FromStr for Composer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(Composer::Additive),
            "intersective" => Ok(Composer::Intersective),
            other => Err(Error::Config(format!(
                "unknown composer '{other}', expected 'additive' or 'intersective'"
            ))),
        }
    }
}

/// Elementwise sum of one or more equal-length vectors.
pub fn compose_additive(vectors: &[&[f64]]) -> Result<Vec<f64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot compose zero vectors".into()))?;
    let mut out = first.to_vec();
    for v in &vectors[1..] {
        if v.len() != out.len() {
            return Err(Error::Dimension(format!(
                "composing vectors of lengths {} and {}",
                out.len(),
                v.len()
            )));
        }
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += x;
        }
    }
    Ok(out)
}

/// Feature intersection with pointwise-minimum weights — the fuzzy-set meet
/// of the two supports.
pub fn compose_intersective(u: &SparseVector, v: &SparseVector) -> SparseVector {
    let (mut i, mut j) = (0, 0);
    let (ue, ve) = (u.entries(), v.entries());
    let mut entries = Vec::new();
    while i < ue.len() && j < ve.len() {
        match ue[i].0.cmp(&ve[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                entries.push((ue[i].0, ue[i].1.min(ve[j].1)));
                i += 1;
                j += 1;
            }
        }
    }
    SparseVector { entries }
}
