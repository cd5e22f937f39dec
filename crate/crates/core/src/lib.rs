//! Numerical laboratory for spectral perturbation of compact operators.
//!
//! The library builds finite truncations of a positive compact operator K
//! (diagonal spectral laws, Nystrom-discretized integral kernels), perturbs
//! the metric of the space by a symmetric B with I + B positive, solves the
//! generalized eigenproblem K h = lambda (I + B) h, and measures whether the
//! two-term law lambda_n = (a n + b + O(n^-delta))^-B survives:
//!
//! - [`linalg`]: dense Cholesky / symmetric / generalized-symmetric solvers
//! - [`models`]: model operators K and perturbation recipes for B
//! - [`gen_eigen`]: perturbed spectra, projected problems, homotopy in epsilon
//! - [`asymptotics`]: two-term fits, remainder-exponent estimation, verdicts
//! - [`checks`]: every inequality and identity of the underlying estimates as
//!   a numerical validator producing a [`checks::CheckReport`]

pub mod asymptotics;
pub mod checks;
pub mod error;
pub mod gen_eigen;
pub mod linalg;
pub mod models;

pub use error::{Error, Result};
