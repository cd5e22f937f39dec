//! The generalized eigenproblem K h = lambda (I + B) h in the modified inner
//! product, its head/tail projections, and the epsilon-homotopy
//! K h = lambda (I + eps B) h connecting the unperturbed and perturbed
//! spectra.

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, generalized_sym_eigen, generalized_sym_eigenvalues, solve_lower,
    solve_lower_transpose, Mat, SolverOptions, SymMatrix,
};
use crate::models::{PerturbationMatrix, SpectralModel};
use rayon::prelude::*;

/// The modified inner product <h,g> = ((I+B) h, g), with the Cholesky factor
/// of the metric matrix cached.
#[derive(Debug, Clone)]
pub struct HMetric {
    g: SymMatrix,
    chol_l: Mat,
}

impl HMetric {
    pub fn new(b: &PerturbationMatrix) -> Result<Self> {
        Self::from_matrix(b.metric_matrix())
    }

    pub fn from_matrix(g: SymMatrix) -> Result<Self> {
        let chol_l = cholesky(&g, crate::linalg::DEFAULT_PIVOT_FLOOR_REL)?;
        Ok(Self { g, chol_l })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.g
    }

    pub fn cholesky_factor(&self) -> &Mat {
        &self.chol_l
    }

    pub fn inner(&self, h: &[f64], g_vec: &[f64]) -> f64 {
        crate::linalg::dot(&self.g.matvec(h), g_vec)
    }

    /// |||h||| = <h,h>^(1/2)
    pub fn norm(&self, h: &[f64]) -> f64 {
        self.g.quad_form(h).max(0.0).sqrt()
    }

    /// (I+B)^{-1} v through the cached factor.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        solve_lower_transpose(&self.chol_l, &solve_lower(&self.chol_l, v))
    }
}

/// Spectrum of the perturbed problem at a homotopy parameter epsilon
/// (epsilon = 1 is the full perturbation). Eigenvector columns, when kept,
/// are orthonormal under the I + eps B metric.
#[derive(Debug, Clone)]
pub struct PerturbedSpectrum {
    pub values: Vec<f64>,
    pub vectors: Option<Mat>,
    pub epsilon: f64,
}

impl PerturbedSpectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Index window of a projected problem: the span of the first n eigenvectors
/// of K (`Head`) or of everything from the n-th on (`Tail`), 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Head(usize),
    Tail(usize),
}

impl Window {
    /// 0-based index range into the K-eigenbasis.
    pub fn range(&self, dim: usize) -> Result<std::ops::Range<usize>> {
        let (lo, hi, n) = match *self {
            Window::Head(n) => (0, n, n),
            Window::Tail(n) => (n.saturating_sub(1), dim, n),
        };
        if n == 0 || n > dim {
            return Err(Error::InvalidInput(format!(
                "window index {n} out of range 1..={dim}"
            )));
        }
        Ok(lo..hi)
    }
}

fn check_dims(k: &SpectralModel, b: &PerturbationMatrix) -> Result<()> {
    if k.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "model dim {} vs perturbation dim {}",
            k.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Solve K h = lambda (I + B) h; values positive and descending, vectors
/// (I+B)-orthonormal.
pub fn solve_generalized(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    opts: &SolverOptions,
) -> Result<PerturbedSpectrum> {
    check_dims(k, b)?;
    let dec = generalized_sym_eigen(&k.k_matrix(), &b.metric_matrix(), opts)?;
    Ok(PerturbedSpectrum { values: dec.values, vectors: Some(dec.vectors), epsilon: 1.0 })
}

/// Eigenvalues of the perturbed problem only; the workhorse for homotopies,
/// sweeps, and fits where the basis is not needed.
pub fn solve_generalized_values(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    opts: &SolverOptions,
) -> Result<PerturbedSpectrum> {
    check_dims(k, b)?;
    let values = generalized_sym_eigenvalues(&k.k_matrix(), &b.metric_matrix(), opts)?;
    Ok(PerturbedSpectrum { values, vectors: None, epsilon: 1.0 })
}

/// Solve the generalized problem restricted to a head or tail window of the
/// K-eigenbasis. Vectors are in window coordinates (position 0 of a Tail(n)
/// vector is coordinate n of the full basis).
pub fn projected_solve(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    window: Window,
    opts: &SolverOptions,
) -> Result<PerturbedSpectrum> {
    check_dims(k, b)?;
    let range = window.range(k.dim())?;
    let lam = &k.lambdas()[range.clone()];
    let a_sub = SymMatrix::from_diag(lam);
    let g_sub = b.entries().submatrix(range.start, range.end).plus_identity_scaled(1.0);
    let dec = generalized_sym_eigen(&a_sub, &g_sub, opts)?;
    Ok(PerturbedSpectrum { values: dec.values, vectors: Some(dec.vectors), epsilon: 1.0 })
}

/// Eigenvalue paths along the homotopy eps in [0,1] mapped over `steps`
/// equispaced points, with per-index maximal step jumps and any near-crossing
/// of adjacent paths (gap below 1e-14) reported rather than failed.
#[derive(Debug, Clone)]
pub struct HomotopyTrack {
    /// Spectra ordered by epsilon; values only.
    pub spectra: Vec<PerturbedSpectrum>,
    /// J_n = max_i |lambda_n(eps_{i+1}) - lambda_n(eps_i)|, 0-based index.
    pub max_step_jump: Vec<f64>,
    /// (step index, eigenvalue index) pairs where adjacent paths nearly touch.
    pub crossings: Vec<(usize, usize)>,
}

const CROSSING_GAP: f64 = 1e-14;

/// Track the spectrum along eps = 0, 1/(steps-1), ..., 1. Steps solve in
/// parallel; the result is ordered by eps regardless of completion order.
pub fn homotopy_track(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    steps: usize,
    opts: &SolverOptions,
) -> Result<HomotopyTrack> {
    check_dims(k, b)?;
    if steps < 2 {
        return Err(Error::InvalidInput("homotopy needs at least 2 steps".into()));
    }
    let spectra: Vec<PerturbedSpectrum> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let eps = i as f64 / (steps - 1) as f64;
            let g = b.entries().plus_identity_scaled(eps);
            let values = generalized_sym_eigenvalues(&k.k_matrix(), &g, opts)?;
            Ok(PerturbedSpectrum { values, vectors: None, epsilon: eps })
        })
        .collect::<Result<_>>()?;

    let n = k.dim();
    let mut max_step_jump = vec![0.0; n];
    for w in spectra.windows(2) {
        for j in 0..n {
            let jump = (w[1].values[j] - w[0].values[j]).abs();
            if jump > max_step_jump[j] {
                max_step_jump[j] = jump;
            }
        }
    }
    let mut crossings = Vec::new();
    for (i, s) in spectra.iter().enumerate() {
        for j in 1..n {
            if s.values[j - 1] - s.values[j] < CROSSING_GAP {
                crossings.push((i, j));
            }
        }
    }
    Ok(HomotopyTrack { spectra, max_step_jump, crossings })
}
