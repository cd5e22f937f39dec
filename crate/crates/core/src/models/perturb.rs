//! Perturbation recipes: entries b_nm = (B h_n, h_m) in the K-eigenbasis.
//!
//! Every construction validates positivity of I + B before the matrix becomes
//! usable downstream; the Cholesky factorization doubles as the validator.

use crate::error::Result;
use crate::linalg::{cholesky, sym_eigen, SolverOptions, SymMatrix, DEFAULT_PIVOT_FLOOR_REL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which hypothesis a rank-one construction saturates: row-norm decay
/// ||B h_n|| <= c n^-(1+delta) (`RowDecay`) or entrywise decay
/// |b_nm| <= c (nm)^-(1+delta)/2 (`EntryDecay`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationMode {
    RowDecay,
    EntryDecay,
}

/// Symmetric perturbation with I + B positive definite (validated).
#[derive(Debug, Clone)]
pub struct PerturbationMatrix {
    entries: SymMatrix,
    pub tag: String,
}

impl PerturbationMatrix {
    /// Wrap entries after validating that I + B is positive definite.
    pub fn new(entries: SymMatrix, tag: impl Into<String>) -> Result<Self> {
        let g = entries.plus_identity_scaled(1.0);
        cholesky(&g, DEFAULT_PIVOT_FLOOR_REL)?;
        Ok(Self { entries, tag: tag.into() })
    }

    pub fn zero(n: usize) -> Self {
        Self { entries: SymMatrix::zeros(n), tag: "zero".into() }
    }

    pub fn dim(&self) -> usize {
        self.entries.n()
    }

    pub fn entries(&self) -> &SymMatrix {
        &self.entries
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.entries.get(n, m)
    }

    /// I + B, the metric matrix.
    pub fn metric_matrix(&self) -> SymMatrix {
        self.entries.plus_identity_scaled(1.0)
    }

    /// Euclidean norm of column n (0-based), i.e. ||B h_n||.
    pub fn column_norm(&self, n: usize) -> f64 {
        crate::linalg::norm2(self.entries.row(n))
    }
}

/// Rank-one perturbation sigma * u u^T with u_n = n^-(1+delta)/2 (EntryDecay
/// mode, saturating the entrywise bound with c = |sigma|) or
/// u_n = n^-(1+delta) (RowDecay mode, giving row norms <= |sigma| ||u|| n^-(1+delta)).
pub fn build_rank_one_perturbation(
    sigma: f64,
    delta: f64,
    n: usize,
    mode: PerturbationMode,
) -> Result<PerturbationMatrix> {
    let exponent = match mode {
        PerturbationMode::EntryDecay => (1.0 + delta) / 2.0,
        PerturbationMode::RowDecay => 1.0 + delta,
    };
    let u: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-exponent)).collect();
    let entries = SymMatrix::from_fn(n, |i, j| sigma * u[i] * u[j])?;
    PerturbationMatrix::new(
        entries,
        format!("rank_one({mode:?}, sigma={sigma}, delta={delta}, N={n})"),
    )
}

/// Full-rank matrix saturating the entrywise decay bound with symmetric
/// random signs: b_nm = sigma * eps_nm (nm)^-(1+delta)/2, eps_nm = eps_mn in
/// {-1, +1} drawn from a seeded generator.
pub fn build_random_sign_perturbation(
    sigma: f64,
    delta: f64,
    n: usize,
    seed: u64,
) -> Result<PerturbationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let v = sigma
                * sign
                * ((i + 1) as f64 * (j + 1) as f64).powf(-(1.0 + delta) / 2.0);
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    let entries = SymMatrix::from_entries(n, &entries)?;
    PerturbationMatrix::new(
        entries,
        format!("random_sign(sigma={sigma}, delta={delta}, N={n}, seed={seed})"),
    )
}

/// Spectral sign split B = B_+ + B_-: projection onto the nonnegative
/// eigenspace and the (negative-semidefinite) remainder. I + B_- is validated
/// on construction.
pub fn split_sign(
    b: &PerturbationMatrix,
    opts: &SolverOptions,
) -> Result<(PerturbationMatrix, PerturbationMatrix)> {
    let dec = sym_eigen(b.entries(), opts)?;
    let plus_vals: Vec<f64> = dec.values.iter().map(|&v| v.max(0.0)).collect();
    let minus_vals: Vec<f64> = dec.values.iter().map(|&v| v.min(0.0)).collect();
    let plus = SymMatrix::from_spectral(&plus_vals, &dec.vectors);
    let minus = SymMatrix::from_spectral(&minus_vals, &dec.vectors);
    let plus = PerturbationMatrix::new(plus, format!("{}+", b.tag))?;
    let minus = PerturbationMatrix::new(minus, format!("{}-", b.tag))?;
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn zero_sigma_gives_zero_matrix() {
        for mode in [PerturbationMode::RowDecay, PerturbationMode::EntryDecay] {
            let b = build_rank_one_perturbation(0.0, 1.0, 4, mode).unwrap();
            assert!(b.entries().frobenius_norm() == 0.0);
        }
        let b = build_random_sign_perturbation(0.0, 0.5, 4, 1).unwrap();
        assert!(b.entries().frobenius_norm() == 0.0);
    }

    #[test]
    fn entry_decay_bound_met_with_equality() {
        // sigma=0.1, delta=1, N=2: b_nm = 0.1 (nm)^-1
        let b = build_rank_one_perturbation(0.1, 1.0, 2, PerturbationMode::EntryDecay).unwrap();
        let want = [[0.1, 0.05], [0.05, 0.025]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((b.get(i, j) - want[i][j]).abs() < 1e-16);
            }
        }
        // |b_nm| (nm)^(1+delta)/2 == |sigma| at every entry
        let n = 50;
        let b = build_rank_one_perturbation(-0.07, 0.5, n, PerturbationMode::EntryDecay).unwrap();
        for i in 0..n {
            for j in 0..n {
                let scaled = b.get(i, j).abs()
                    * ((i + 1) as f64 * (j + 1) as f64).powf(0.75);
                assert!((scaled - 0.07).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn row_decay_mode_row_norms_decay() {
        let n = 100;
        let sigma = 0.1;
        let b = build_rank_one_perturbation(sigma, 1.0, n, PerturbationMode::RowDecay).unwrap();
        let u_norm = (1..=n).map(|k| (k as f64).powi(-4)).sum::<f64>().sqrt();
        for k in 0..n {
            let bound = sigma * u_norm * ((k + 1) as f64).powi(-2);
            assert!(b.column_norm(k) <= bound * (1.0 + 1e-12), "row {k}");
        }
    }

    #[test]
    fn random_sign_reproducible_and_symmetric() {
        let a = build_random_sign_perturbation(0.05, 1.0, 3, 42).unwrap();
        let b = build_random_sign_perturbation(0.05, 1.0, 3, 42).unwrap();
        assert_eq!(a.entries(), b.entries());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), a.get(j, i));
                let want = 0.05 * ((i + 1) as f64 * (j + 1) as f64).powf(-1.0);
                assert!((a.get(i, j).abs() - want).abs() < 1e-15);
            }
        }
        let c = build_random_sign_perturbation(0.05, 1.0, 3, 43).unwrap();
        assert_ne!(a.entries(), c.entries());
    }

    #[test]
    fn positivity_validated_at_construction() {
        // sigma too large: 1 + sigma ||u||^2 <= 0
        let err = build_rank_one_perturbation(-1.5, 1.0, 10, PerturbationMode::EntryDecay);
        assert!(matches!(err, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn split_diagonal_case() {
        let entries = SymMatrix::from_diag(&[0.1, -0.1]);
        let b = PerturbationMatrix::new(entries, "diag").unwrap();
        let (p, m) = split_sign(&b, &SolverOptions::default()).unwrap();
        assert!((p.get(0, 0) - 0.1).abs() < 1e-14 && p.get(1, 1).abs() < 1e-14);
        assert!(m.get(0, 0).abs() < 1e-14 && (m.get(1, 1) + 0.1).abs() < 1e-14);
    }

    #[test]
    fn split_reconstructs_and_idempotent_on_positive_part() {
        let opts = SolverOptions::default();
        let b = build_random_sign_perturbation(0.05, 1.0, 50, 42).unwrap();
        let (p, m) = split_sign(&b, &opts).unwrap();
        // B+ >= 0, B- <= 0, B+ + B- = B
        let pev = crate::linalg::sym_eigenvalues(p.entries(), &opts).unwrap();
        let mev = crate::linalg::sym_eigenvalues(m.entries(), &opts).unwrap();
        let scale = b.entries().frobenius_norm();
        assert!(pev.iter().all(|&v| v >= -1e-12 * scale));
        assert!(mev.iter().all(|&v| v <= 1e-12 * scale));
        let sum = p.entries().add(m.entries());
        assert!(sum.sub(b.entries()).frobenius_norm() <= 1e-12 * scale);
        // positive part already split: split(B+) = (B+, 0)
        let (pp, pm) = split_sign(&p, &opts).unwrap();
        assert!(pp.entries().sub(p.entries()).frobenius_norm() <= 1e-10 * scale);
        assert!(pm.entries().frobenius_norm() <= 1e-10 * scale);
    }
}
