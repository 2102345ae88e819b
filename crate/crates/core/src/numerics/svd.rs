use super::matrix::{dot, norm, DenseMatrix};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Extra random probe directions beyond the requested rank.
pub const OVERSAMPLING: usize = 10;
/// Subspace (power) iterations; each one sharpens the captured range.
pub const POWER_ITERATIONS: usize = 7;

const MAX_JACOBI_SWEEPS: usize = 30;

/// Truncated factorisation `A ≈ U · diag(S) · Vᵀ` with `k` columns in each
/// factor and singular values sorted non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    /// Dense representation of each input row: `U` scaled by the singular
    /// values, i.e. row i of `A` expressed in the top-k right-singular basis.
    pub fn row_projection(&self) -> DenseMatrix {
        let mut out = self.u.clone();
        for r in 0..out.rows() {
            for (x, &s) in out.row_mut(r).iter_mut().zip(&self.singular_values) {
                *x *= s;
            }
        }
        out
    }
}

/// Randomized truncated SVD of a sparse row-major matrix. `rows[i]` lists the
/// `(column, weight)` entries of row i; `n_cols` is the full width. The probe
/// matrix is seeded, so results are bit-reproducible.
pub fn truncated_svd<R: AsRef<[(usize, f64)]>>(
    rows: &[R],
    n_cols: usize,
    k: usize,
    seed: u64,
) -> Result<Svd> {
    let m = rows.len();
    if m == 0 || n_cols == 0 {
        return Err(Error::InvalidInput("cannot factor an empty matrix".into()));
    }
    if k == 0 || k > m.min(n_cols) {
        return Err(Error::InvalidInput(format!(
            "rank k = {k} out of range for a {m}x{n_cols} matrix"
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        for &(col, w) in row.as_ref() {
            if col >= n_cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} references column {col}, but the matrix has {n_cols}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "row {i} has a non-finite weight in column {col}"
                )));
            }
        }
    }

    let p = (k + OVERSAMPLING).min(m).min(n_cols);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omega = DenseMatrix::zeros(n_cols, p);
    for r in 0..n_cols {
        for c in 0..p {
            omega.set(r, c, standard_normal(&mut rng));
        }
    }

    let mut q = orthonormalize(&sparse_times_dense(rows, &omega, m));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormalize(&sparse_t_times_dense(rows, &q, n_cols));
        q = orthonormalize(&sparse_times_dense(rows, &z, m));
    }

    // M = AᵀQ holds the projected problem; its one-sided Jacobi SVD gives
    // A ≈ (Q·J) · diag(σ) · (M·J / σ)ᵀ.
    let mt = sparse_t_times_dense(rows, &q, n_cols);
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| mt.column(j)).collect();
    let rotations = one_sided_jacobi(&mut cols);
    let qj = q.matmul(&rotations)?;

    let sigmas: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| sigmas[b].partial_cmp(&sigmas[a]).unwrap().then(a.cmp(&b)));

    let tiny = sigmas[order[0]] * f64::EPSILON;
    let mut u = DenseMatrix::zeros(m, k);
    let mut v = DenseMatrix::zeros(n_cols, k);
    let mut s = vec![0.0; k];
    for (out_idx, &src) in order[..k].iter().enumerate() {
        s[out_idx] = sigmas[src];
        for r in 0..m {
            u.set(r, out_idx, qj.get(r, src));
        }
        if sigmas[src] > tiny {
            for (r, &x) in cols[src].iter().enumerate() {
                v.set(r, out_idx, x / sigmas[src]);
            }
        }
    }
    Ok(Svd {
        u,
        singular_values: s,
        v,
    })
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; the lower bound keeps ln() finite.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn sparse_times_dense<R: AsRef<[(usize, f64)]>>(
    rows: &[R],
    dense: &DenseMatrix,
    m: usize,
) -> DenseMatrix {
    let p = dense.cols();
    let mut out = DenseMatrix::zeros(m, p);
    for (i, row) in rows.iter().enumerate() {
        let dst = out.row_mut(i);
        for &(j, w) in row.as_ref() {
            for (d, &x) in dst.iter_mut().zip(dense.row(j)) {
                *d += w * x;
            }
        }
    }
    out
}

fn sparse_t_times_dense<R: AsRef<[(usize, f64)]>>(
    rows: &[R],
    dense: &DenseMatrix,
    n_cols: usize,
) -> DenseMatrix {
    let p = dense.cols();
    let mut out = DenseMatrix::zeros(n_cols, p);
    for (i, row) in rows.iter().enumerate() {
        let src = dense.row(i);
        for &(j, w) in row.as_ref() {
            let dst = out.row_mut(j);
            for (d, &x) in dst.iter_mut().zip(src) {
                *d += w * x;
            }
        }
    }
    out
}

/// Modified Gram-Schmidt with one re-orthogonalisation pass. Columns that
/// collapse (the input had lower rank than requested) are replaced by the
/// first canonical basis vector that still has a component outside the span,
/// keeping the result deterministic.
fn orthonormalize(input: &DenseMatrix) -> DenseMatrix {
    let (rows, cols) = (input.rows(), input.cols());
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut next_fill = 0usize;
    for j in 0..cols {
        let mut v = input.column(j);
        let original = norm(&v);
        project_out(&basis, &mut v);
        let mut n = norm(&v);
        if n <= original.max(1.0) * 1e-12 {
            let mut replaced = false;
            while next_fill < rows {
                let mut e = vec![0.0; rows];
                e[next_fill] = 1.0;
                next_fill += 1;
                project_out(&basis, &mut e);
                let en = norm(&e);
                if en > 0.5 {
                    v = e;
                    n = en;
                    replaced = true;
                    break;
                }
            }
            if !replaced {
                basis.push(vec![0.0; rows]);
                continue;
            }
        }
        for x in v.iter_mut() {
            *x /= n;
        }
        basis.push(v);
    }
    let mut out = DenseMatrix::zeros(rows, cols);
    for (j, col) in basis.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            out.set(i, j, x);
        }
    }
    out
}

fn project_out(basis: &[Vec<f64>], v: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let r = dot(q, v);
            if r != 0.0 {
                for (x, &qx) in v.iter_mut().zip(q) {
                    *x -= r * qx;
                }
            }
        }
    }
}

/// One-sided Jacobi: rotates column pairs of `cols` until they are mutually
/// orthogonal, accumulating the rotations. After convergence the column norms
/// are the singular values.
fn one_sided_jacobi(cols: &mut [Vec<f64>]) -> DenseMatrix {
    let p = cols.len();
    let mut acc = DenseMatrix::identity(p);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let a = dot(&cols[i], &cols[i]);
                let b = dot(&cols[j], &cols[j]);
                let c = dot(&cols[i], &cols[j]);
                if c == 0.0 || c.abs() <= 1e-13 * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (b - a) / (2.0 * c);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (left, right) = cols.split_at_mut(j);
                for (vi, vj) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (a0, b0) = (*vi, *vj);
                    *vi = cs * a0 - sn * b0;
                    *vj = sn * a0 + cs * b0;
                }
                for r in 0..p {
                    let (a0, b0) = (acc.get(r, i), acc.get(r, j));
                    acc.set(r, i, cs * a0 - sn * b0);
                    acc.set(r, j, sn * a0 + cs * b0);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dense_as_sparse(a: &DenseMatrix) -> Vec<Vec<(usize, f64)>> {
        (0..a.rows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w != 0.0)
                    .map(|(j, &w)| (j, w))
                    .collect()
            })
            .collect()
    }

    fn max_ortho_deviation(m: &DenseMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..m.cols() {
            for j in i..m.cols() {
                let d = dot(&m.column(i), &m.column(j));
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - expected).abs());
            }
        }
        worst
    }

    fn seeded_unit(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let id = DenseMatrix::identity(3);
        let svd = truncated_svd(&dense_as_sparse(&id), 3, 3, 0).unwrap();
        for &s in &svd.singular_values {
            assert_relative_eq!(s, 1.0, epsilon = 1e-10);
        }
        assert!(max_ortho_deviation(&svd.u) < 1e-8);
        assert!(max_ortho_deviation(&svd.v) < 1e-8);
    }

    #[test]
    fn rank_one_recovers_the_norm_product() {
        let u: Vec<f64> = seeded_unit(20, 1).iter().map(|x| x * 2.0).collect();
        let v: Vec<f64> = seeded_unit(30, 2).iter().map(|x| x * 3.0).collect();
        let mut a = DenseMatrix::zeros(20, 30);
        for (i, &ui) in u.iter().enumerate() {
            for (j, &vj) in v.iter().enumerate() {
                a.set(i, j, ui * vj);
            }
        }
        let svd = truncated_svd(&dense_as_sparse(&a), 30, 1, 7).unwrap();
        assert_relative_eq!(svd.singular_values[0], 6.0, epsilon = 1e-8);
    }

    #[test]
    fn rank_two_matrix_is_reconstructed() {
        let u1 = seeded_unit(20, 3);
        let mut u2 = seeded_unit(20, 4);
        let r = dot(&u1, &u2);
        for (x, &y) in u2.iter_mut().zip(&u1) {
            *x -= r * y;
        }
        let n = norm(&u2);
        for x in u2.iter_mut() {
            *x /= n;
        }
        let v1 = seeded_unit(30, 5);
        let mut v2 = seeded_unit(30, 6);
        let r = dot(&v1, &v2);
        for (x, &y) in v2.iter_mut().zip(&v1) {
            *x -= r * y;
        }
        let n = norm(&v2);
        for x in v2.iter_mut() {
            *x /= n;
        }

        let mut a = DenseMatrix::zeros(20, 30);
        for i in 0..20 {
            for j in 0..30 {
                a.set(i, j, 5.0 * u1[i] * v1[j] + 2.0 * u2[i] * v2[j]);
            }
        }
        let svd = truncated_svd(&dense_as_sparse(&a), 30, 2, 11).unwrap();
        assert_relative_eq!(svd.singular_values[0], 5.0, epsilon = 1e-8);
        assert_relative_eq!(svd.singular_values[1], 2.0, epsilon = 1e-8);
        assert!(max_ortho_deviation(&svd.u) < 1e-8);
        assert!(max_ortho_deviation(&svd.v) < 1e-8);

        let mut worst = 0.0f64;
        for i in 0..20 {
            for j in 0..30 {
                let mut approx_ij = 0.0;
                for t in 0..2 {
                    approx_ij += svd.u.get(i, t) * svd.singular_values[t] * svd.v.get(j, t);
                }
                worst = worst.max((approx_ij - a.get(i, j)).abs());
            }
        }
        assert!(worst < 1e-8, "reconstruction error {worst}");
    }

    #[test]
    fn projection_scales_left_factor_by_singular_values() {
        let id = DenseMatrix::identity(4);
        let svd = truncated_svd(&dense_as_sparse(&id), 4, 2, 3).unwrap();
        let proj = svd.row_projection();
        for r in 0..4 {
            for c in 0..2 {
                assert_relative_eq!(
                    proj.get(r, c),
                    svd.u.get(r, c) * svd.singular_values[c],
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn factorisation_is_deterministic_per_seed() {
        let rows: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 1.0), (2, 2.0)],
            vec![(1, 3.0)],
            vec![(0, 0.5), (3, 1.5)],
        ];
        let a = truncated_svd(&rows, 4, 2, 42).unwrap();
        let b = truncated_svd(&rows, 4, 2, 42).unwrap();
        assert_eq!(a.u.data(), b.u.data());
        assert_eq!(a.singular_values, b.singular_values);
        assert_eq!(a.v.data(), b.v.data());
    }

    #[test]
    fn invalid_requests_are_rejected() {
        let rows: Vec<Vec<(usize, f64)>> = vec![vec![(0, 1.0)], vec![(1, 1.0)]];
        assert!(truncated_svd(&rows, 2, 0, 0).is_err());
        assert!(truncated_svd(&rows, 2, 3, 0).is_err());
        let bad: Vec<Vec<(usize, f64)>> = vec![vec![(5, 1.0)]];
        assert!(truncated_svd(&bad, 2, 1, 0).is_err());
    }

    #[test]
    fn singular_values_are_sorted_and_non_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let m = rng.gen_range(2..7);
            let n = rng.gen_range(2..7);
            let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
            for _ in 0..m {
                let mut row = Vec::new();
                for j in 0..n {
                    if rng.gen_range(0.0..1.0) < 0.6 {
                        let w: f64 = rng.gen_range(-2.0..2.0);
                        if w != 0.0 {
                            row.push((j, w));
                        }
                    }
                }
                rows.push(row);
            }
            let k = 1 + trial % m.min(n);
            let svd = truncated_svd(&rows, n, k, trial as u64).unwrap();
            for pair in svd.singular_values.windows(2) {
                assert!(pair[0] >= pair[1]);
            }
            assert!(svd.singular_values.iter().all(|&s| s >= 0.0));
        }
    }
}
