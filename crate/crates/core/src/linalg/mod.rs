//! Dense symmetric kernels: Cholesky, symmetric eigendecomposition, and the
//! generalized symmetric-definite problem A x = lambda G x by congruence
//! reduction through the Cholesky factor of G.
//!
//! All operations are pure functions of their inputs and safe to call from
//! multiple threads.

mod chol;
mod dense;
mod lu;
mod tridiag;

pub use chol::{
    cholesky, reduce_congruence, solve_lower, solve_lower_transpose, solve_spd,
    DEFAULT_PIVOT_FLOOR_REL,
};
pub use dense::{dot, norm2, Mat, SymMatrix};
pub use lu::{lu_factor, LuFactor};
pub use tridiag::{householder_tridiag, ql_implicit, tridiag_eigenvector, Tridiagonal};

use crate::error::Result;

/// Inner product under which an eigenbasis is orthonormal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// The modified product <h,g> = ((I+B)h, g); the metric matrix is the G
    /// that was passed to the generalized solve.
    HMetric,
}

/// Solver tunables. Defaults: rtol 1e-10, pivot floor 1e-12 * max|diag|,
/// 64 QL iterations per eigenvalue.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub rtol: f64,
    pub pivot_floor_rel: f64,
    pub ql_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, pivot_floor_rel: DEFAULT_PIVOT_FLOOR_REL, ql_max_iter: 64 }
    }
}

/// Eigendecomposition with values sorted strictly descending (ties broken by
/// original column order) and eigenvector columns orthonormal under `metric`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: Mat,
    pub metric: Metric,
}

/// Descending sort permutation, stable in the original index.
fn sort_perm_desc(values: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    perm
}

/// Full eigendecomposition of a symmetric matrix (Euclidean metric).
pub fn sym_eigen(m: &SymMatrix, opts: &SolverOptions) -> Result<EigenDecomposition> {
    let tri = householder_tridiag(m.as_mat());
    let mut d = tri.d.clone();
    let mut zt = tri.q_transpose();
    ql_implicit(&mut d, &tri.e, Some(&mut zt), opts.ql_max_iter)?;
    let perm = sort_perm_desc(&d);
    let values: Vec<f64> = perm.iter().map(|&k| d[k]).collect();
    let vectors = zt.permute_rows(&perm).transposed();
    Ok(EigenDecomposition { values, vectors, metric: Metric::Euclidean })
}

/// Eigenvalues only, sorted descending.
pub fn sym_eigenvalues(m: &SymMatrix, opts: &SolverOptions) -> Result<Vec<f64>> {
    let tri = householder_tridiag(m.as_mat());
    let mut d = tri.d.clone();
    ql_implicit(&mut d, &tri.e, None, opts.ql_max_iter)?;
    let perm = sort_perm_desc(&d);
    Ok(perm.into_iter().map(|k| d[k]).collect())
}

/// Generalized symmetric-definite problem A x = lambda G x.
///
/// G is factored as L L^T, the standard problem L^{-1} A L^{-T} is solved, and
/// eigenvectors are mapped back through L^{-T}, which makes the returned
/// columns G-orthonormal (metric `HMetric`).
pub fn generalized_sym_eigen(
    a: &SymMatrix,
    g: &SymMatrix,
    opts: &SolverOptions,
) -> Result<EigenDecomposition> {
    let l = cholesky(g, opts.pivot_floor_rel)?;
    let c = reduce_congruence(&l, a);
    let std = sym_eigen(&c, opts)?;
    let mut vt = std.vectors.transposed(); // rows = reduced-basis eigenvectors
    // x = L^{-T} w for every eigenvector w
    let mut back = vt.transposed();
    chol::solve_lower_transpose_multi(&l, &mut back);
    vt = back;
    Ok(EigenDecomposition { values: std.values, vectors: vt, metric: Metric::HMetric })
}

/// Generalized eigenvalues only.
pub fn generalized_sym_eigenvalues(
    a: &SymMatrix,
    g: &SymMatrix,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let l = cholesky(g, opts.pivot_floor_rel)?;
    let c = reduce_congruence(&l, a);
    sym_eigenvalues(&c, opts)
}

/// Which end of the spectrum a targeted solve should extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumEnd {
    Largest,
    Smallest,
}

/// One extreme eigenpair of A x = lambda G x.
#[derive(Debug, Clone)]
pub struct ExtremePair {
    pub value: f64,
    /// Eigenvector normalized to unit Euclidean length.
    pub vector: Vec<f64>,
    /// The full eigenvalue list, sorted descending.
    pub all_values: Vec<f64>,
}

/// One extreme eigenpair of A x = lambda G x without accumulating the full
/// eigenvector basis: QL for the values, then tridiagonal inverse iteration
/// and reflector back-substitution for the single vector.
pub fn generalized_extreme_pair(
    a: &SymMatrix,
    g: &SymMatrix,
    end: SpectrumEnd,
    opts: &SolverOptions,
) -> Result<ExtremePair> {
    let l = cholesky(g, opts.pivot_floor_rel)?;
    let c = reduce_congruence(&l, a);
    let tri = householder_tridiag(c.as_mat());
    let mut d = tri.d.clone();
    ql_implicit(&mut d, &tri.e, None, opts.ql_max_iter)?;
    let perm = sort_perm_desc(&d);
    let all_values: Vec<f64> = perm.into_iter().map(|k| d[k]).collect();
    let mu = match end {
        SpectrumEnd::Largest => all_values[0],
        SpectrumEnd::Smallest => *all_values.last().unwrap(),
    };
    let y = tridiag_eigenvector(&tri.d, &tri.e, mu);
    let w = tri.apply_q(&y);
    let mut x = solve_lower_transpose(&l, &w);
    let inv = 1.0 / norm2(&x);
    for v in &mut x {
        *v *= inv;
    }
    Ok(ExtremePair { value: mu, vector: x, all_values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &SymMatrix, dec: &EigenDecomposition, k: usize) -> f64 {
        let v = dec.vectors.col(k);
        let mv = m.matvec(&v);
        let r: Vec<f64> = mv.iter().zip(&v).map(|(a, b)| a - dec.values[k] * b).collect();
        norm2(&r)
    }

    #[test]
    fn diagonal_case_sorted_with_permuted_identity_vectors() {
        let m = SymMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let dec = sym_eigen(&m, &SolverOptions::default()).unwrap();
        assert_eq!(dec.values, vec![3.0, 2.0, 1.0]);
        for (k, orig) in [(0usize, 2usize), (1, 1), (2, 0)] {
            let v = dec.vectors.col(k);
            for (i, vi) in v.iter().enumerate() {
                let want = if i == orig { 1.0 } else { 0.0 };
                assert!((vi.abs() - want).abs() < 1e-14);
            }
        }
        assert_eq!(dec.metric, Metric::Euclidean);
    }

    #[test]
    fn symmetry_forced_2x2() {
        let m = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let dec = sym_eigen(&m, &SolverOptions::default()).unwrap();
        assert!((dec.values[0] - 1.0).abs() < 1e-15);
        assert!((dec.values[1] + 1.0).abs() < 1e-15);
        let s = 1.0 / 2.0_f64.sqrt();
        let v0 = dec.vectors.col(0);
        assert!((v0[0].abs() - s).abs() < 1e-14 && (v0[1].abs() - s).abs() < 1e-14);
        assert!((v0[0] - v0[1]).abs() < 1e-14); // (1,1)/sqrt2 up to sign
        let v1 = dec.vectors.col(1);
        assert!((v1[0] + v1[1]).abs() < 1e-14); // (1,-1)/sqrt2 up to sign
    }

    #[test]
    fn residual_and_orthonormality_on_seeded_random_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let m = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let dec = sym_eigen(&m, &SolverOptions::default()).unwrap();
        let scale = m.frobenius_norm();
        for k in 0..n {
            assert!(residual(&m, &dec, k) <= 1e-10 * scale, "k={k}");
        }
        for i in 0..n {
            let vi = dec.vectors.col(i);
            for j in i..n {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = dot(&vi, &dec.vectors.col(j));
                assert!((got - want).abs() < 1e-10, "({i},{j})");
            }
        }
        // descending order
        for k in 1..n {
            assert!(dec.values[k - 1] >= dec.values[k]);
        }
    }

    #[test]
    fn generalized_identity_metric_reduces_to_standard() {
        let lam = [0.9, 0.5, 0.1];
        let a = SymMatrix::from_diag(&lam);
        let g = SymMatrix::identity(3);
        let dec = generalized_sym_eigen(&a, &g, &SolverOptions::default()).unwrap();
        for (got, want) in dec.values.iter().zip(&lam) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(dec.metric, Metric::HMetric);
    }

    #[test]
    fn generalized_commuting_diagonal_ratio() {
        let a = SymMatrix::from_diag(&[2.0, 1.0]);
        let g = SymMatrix::from_diag(&[2.0, 1.0]);
        let dec = generalized_sym_eigen(&a, &g, &SolverOptions::default()).unwrap();
        assert!((dec.values[0] - 1.0).abs() < 1e-14);
        assert!((dec.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_2x2_matches_characteristic_polynomial() {
        // A = diag(1, 1/4), G = I + 0.1 * ones; roots of det(A - x G) frozen
        // from the quadratic formula
        let a = SymMatrix::from_diag(&[1.0, 0.25]);
        let g = SymMatrix::from_rows(&[vec![1.1, 0.1], vec![0.1, 1.1]]).unwrap();
        let dec = generalized_sym_eigen(&a, &g, &SolverOptions::default()).unwrap();
        let want = [9.19182711220721815e-1, 2.26650622112611250e-1];
        for (got, w) in dec.values.iter().zip(&want) {
            assert!((got - w).abs() <= 1e-12, "got {got}, want {w}");
        }
        // G-orthonormal columns
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = dot(&g.matvec(&dec.vectors.col(i)), &dec.vectors.col(j));
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extreme_pair_agrees_with_full_solve() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let a = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let b = SymMatrix::from_fn(n, |_, _| rng.gen_range(-0.01..0.01)).unwrap();
        let g = b.plus_identity_scaled(1.0);
        let opts = SolverOptions::default();
        let full = generalized_sym_eigen(&a, &g, &opts).unwrap();

        for (end, idx) in [(SpectrumEnd::Largest, 0), (SpectrumEnd::Smallest, n - 1)] {
            let pair = generalized_extreme_pair(&a, &g, end, &opts).unwrap();
            assert!(
                (pair.value - full.values[idx]).abs() <= 1e-10 * full.values[0].abs().max(1.0)
            );
            for (got, want) in pair.all_values.iter().zip(&full.values) {
                assert!((got - want).abs() <= 1e-10 * full.values[0].abs().max(1.0));
            }
            let ax = a.matvec(&pair.vector);
            let gx = g.matvec(&pair.vector);
            for k in 0..n {
                assert!((ax[k] - pair.value * gx[k]).abs() < 1e-9, "residual at {k}");
            }
        }
    }

    #[test]
    fn no_convergence_reports_budget() {
        let m = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let opts = SolverOptions { ql_max_iter: 0, ..Default::default() };
        match sym_eigen(&m, &opts) {
            Err(crate::error::Error::NoConvergence { max_iter, .. }) => assert_eq!(max_iter, 0),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
