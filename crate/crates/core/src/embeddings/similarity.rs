//! Similarity measures, nearest-neighbor retrieval, the balanced inclusion
//! score, and neighbor-based vector enrichment.

use std::collections::HashSet;

use super::{DenseEmbeddingSpace, SparseEmbeddingSpace, SparseVector};
use crate::numerics::{dot, norm};
use crate::{Error, Result};

/// Cosine similarity; a zero-norm argument yields 0 rather than an error, so
/// empty intersective compositions count as maximally dissimilar.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "cosine over lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot(u, v) / (nu * nv))
}

pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "euclidean distance over lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

pub fn cosine_sparse(u: &SparseVector, v: &SparseVector) -> f64 {
    let (nu, nv) = (u.l2_norm(), v.l2_norm());
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    sparse_dot(u, v) / (nu * nv)
}

pub fn euclidean_sparse(u: &SparseVector, v: &SparseVector) -> f64 {
    let (ue, ve) = (u.entries(), v.entries());
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < ue.len() || j < ve.len() {
        let d = match (ue.get(i), ve.get(j)) {
            (Some(&(fu, wu)), Some(&(fv, wv))) if fu == fv => {
                i += 1;
                j += 1;
                wu - wv
            }
            (Some(&(fu, wu)), Some(&(fv, _))) if fu < fv => {
                i += 1;
                wu
            }
            (Some(_), Some(&(_, wv))) => {
                j += 1;
                wv
            }
            (Some(&(_, wu)), None) => {
                i += 1;
                wu
            }
            (None, Some(&(_, wv))) => {
                j += 1;
                wv
            }
            (None, None) => unreachable!(),
        };
        total += d * d;
    }
    total.sqrt()
}

fn sparse_dot(u: &SparseVector, v: &SparseVector) -> f64 {
    let (ue, ve) = (u.entries(), v.entries());
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < ue.len() && j < ve.len() {
        match ue[i].0.cmp(&ve[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                total += ue[i].1 * ve[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    total
}

/// Every vocabulary id scored against `query`, best first, ties broken by
/// ascending id so rankings are reproducible.
fn rank_dense(space: &DenseEmbeddingSpace, query: &[f64]) -> Vec<(usize, f64)> {
    let qn = norm(query);
    let mut scored: Vec<(usize, f64)> = (0..space.len())
        .map(|id| {
            let rn = space.norm_by_id(id);
            let sim = if qn == 0.0 || rn == 0.0 {
                0.0
            } else {
                dot(query, space.vector_by_id(id)) / (qn * rn)
            };
            (id, sim)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
}

fn rank_sparse(space: &SparseEmbeddingSpace, query: &SparseVector) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = (0..space.len())
        .map(|id| (id, cosine_sparse(query, space.vector_by_id(id))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
}

/// Top-`k` tokens by cosine similarity to `query`, skipping `exclude`. Asking
/// for more neighbors than the vocabulary holds returns the full ranking.
pub fn nearest_neighbors(
    space: &DenseEmbeddingSpace,
    query: &[f64],
    k: usize,
    exclude: &HashSet<String>,
) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::InvalidInput("neighbor count must be at least 1".into()));
    }
    if query.len() != space.dim() {
        return Err(Error::Dimension(format!(
            "query length {} against space dimension {}",
            query.len(),
            space.dim()
        )));
    }
    Ok(take_named(space.vocab(), rank_dense(space, query), k, exclude))
}

pub fn nearest_neighbors_sparse(
    space: &SparseEmbeddingSpace,
    query: &SparseVector,
    k: usize,
    exclude: &HashSet<String>,
) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::InvalidInput("neighbor count must be at least 1".into()));
    }
    Ok(take_named(space.vocab(), rank_sparse(space, query), k, exclude))
}

fn take_named(
    vocab: &super::Vocab,
    ranked: Vec<(usize, f64)>,
    k: usize,
    exclude: &HashSet<String>,
) -> Vec<(String, f64)> {
    ranked
        .into_iter()
        .filter(|&(id, _)| !exclude.contains(vocab.token(id).unwrap()))
        .take(k)
        .map(|(id, sim)| (vocab.token(id).unwrap().to_string(), sim))
        .collect()
}

/// Balanced inclusion score in [0, 1]: the geometric mean of the symmetric
/// weight-overlap term `Σ_{f∈u∩v}(u_f+v_f) / (Σu + Σv)` and the fraction of
/// `u`'s weight mass whose features also appear in `v`. Summation runs in
/// ascending feature order throughout, which makes `binc(v, v)` exactly 1.
pub fn binc(u: &SparseVector, v: &SparseVector) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidInput(
            "inclusion score needs a non-empty narrower vector".into(),
        ));
    }
    let (ue, ve) = (u.entries(), v.entries());
    let (mut i, mut j) = (0, 0);
    let mut shared = 0.0;
    let mut covered = 0.0;
    while i < ue.len() && j < ve.len() {
        match ue[i].0.cmp(&ve[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += ue[i].1 + ve[j].1;
                covered += ue[i].1;
                i += 1;
                j += 1;
            }
        }
    }
    let lin = shared / (u.weight_sum() + v.weight_sum());
    let coverage = covered / u.weight_sum();
    Ok((lin * coverage).sqrt())
}

/// The token's vector plus the sum of its `k` nearest neighbors' vectors,
/// the token itself excluded from the neighbor list.
pub fn distributional_inference(
    space: &DenseEmbeddingSpace,
    token: &str,
    k: usize,
) -> Result<Vec<f64>> {
    let id = space
        .vocab()
        .id(token)
        .ok_or_else(|| Error::UnknownToken(token.to_string()))?;
    let mut out = space.vector_by_id(id).to_vec();
    if k == 0 {
        return Ok(out);
    }
    let neighbors: Vec<usize> = rank_dense(space, space.vector_by_id(id))
        .into_iter()
        .filter(|&(nid, _)| nid != id)
        .take(k)
        .map(|(nid, _)| nid)
        .collect();
    for nid in neighbors {
        for (o, x) in out.iter_mut().zip(space.vector_by_id(nid)) {
            *o += x;
        }
    }
    Ok(out)
}

pub fn distributional_inference_sparse(
    space: &SparseEmbeddingSpace,
    token: &str,
    k: usize,
) -> Result<SparseVector> {
    let id = space
        .vocab()
        .id(token)
        .ok_or_else(|| Error::UnknownToken(token.to_string()))?;
    let mut out = space.vector_by_id(id).clone();
    if k == 0 {
        return Ok(out);
    }
    let neighbors: Vec<usize> = rank_sparse(space, space.vector_by_id(id))
        .into_iter()
        .filter(|&(nid, _)| nid != id)
        .take(k)
        .map(|(nid, _)| nid)
        .collect();
    for nid in neighbors {
        out = sparse_sum(&out, space.vector_by_id(nid));
    }
    Ok(out)
}

/// Feature-wise sum over the union of supports; positive weights stay
/// positive, so the result is a valid sparse vector.
fn sparse_sum(a: &SparseVector, b: &SparseVector) -> SparseVector {
    let (ae, be) = (a.entries(), b.entries());
    let (mut i, mut j) = (0, 0);
    let mut entries = Vec::with_capacity(ae.len() + be.len());
    while i < ae.len() && j < be.len() {
        match ae[i].0.cmp(&be[j].0) {
            std::cmp::Ordering::Less => {
                entries.push(ae[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                entries.push(be[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                entries.push((ae[i].0, ae[i].1 + be[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    entries.extend_from_slice(&ae[i..]);
    entries.extend_from_slice(&be[j..]);
    SparseVector::from_entries(entries).expect("sum of valid sparse vectors is valid")
}
