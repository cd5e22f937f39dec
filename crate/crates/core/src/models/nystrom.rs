//! Nystrom discretization of integral operators on [0,1] and perturbations
//! measured through the resulting eigenbasis.

use super::kernel::KernelSpec;
use super::law::{NystromData, Provenance, SpectralModel};
use super::perturb::PerturbationMatrix;
use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Mat, SolverOptions, SymMatrix};

/// Fraction of lambda_1 below which eigenvalues are treated as round-off.
const TRUNCATION_REL: f64 = 1e-14;

/// Discretize the integral operator with kernel G: assemble
/// A_ij = sqrt(w_i w_j) G(x_i, x_j) at the quadrature points, take the
/// positive part of its spectrum (above `1e-14 * lambda_1`), and keep the
/// node-coordinate eigenvectors.
///
/// Errors with `KernelNotPsd` when more than 1% of the retained count lies
/// below `-1e-14 * lambda_1`, which signals a non-covariance kernel.
pub fn nystrom_model(
    kernel: &KernelSpec,
    n_quad: usize,
    rule: QuadratureRule,
    opts: &SolverOptions,
) -> Result<SpectralModel> {
    if n_quad < 2 {
        return Err(Error::InvalidInput("quadrature size must be at least 2".into()));
    }
    kernel.validate_symmetry()?;
    let (nodes, weights) = rule.nodes_weights(n_quad);
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let a = SymMatrix::from_fn(n_quad, |i, j| {
        sqrt_w[i] * sqrt_w[j] * kernel.evaluate(nodes[i], nodes[j])
    })?;
    let dec = sym_eigen(&a, opts)?;

    let lambda1 = dec.values[0];
    if !(lambda1 > 0.0) {
        return Err(Error::KernelNotPsd { negative: dec.values.len(), retained: 0 });
    }
    let floor = TRUNCATION_REL * lambda1;
    let retained: usize = dec.values.iter().filter(|&&v| v > floor).count();
    let negative: usize = dec.values.iter().filter(|&&v| v < -floor).count();
    if negative * 100 > retained {
        return Err(Error::KernelNotPsd { negative, retained });
    }

    let lambdas: Vec<f64> = dec.values[..retained].to_vec();
    let mut vectors = Mat::zeros(n_quad, retained);
    for k in 0..retained {
        for i in 0..n_quad {
            vectors[(i, k)] = dec.vectors[(i, k)];
        }
    }
    SpectralModel::from_parts(
        lambdas,
        Provenance::Nystrom,
        None,
        Some(NystromData { nodes, weights, vectors }),
        None,
    )
}

/// Express an integral-operator perturbation rho in the model's eigenbasis:
/// b_nm = sum_ij phi_n(x_i) sqrt(w_i) rho(x_i, x_j) sqrt(w_j) phi_m(x_j),
/// which is psi_n^T R psi_m for the weighted kernel matrix R of rho.
pub fn metric_perturbation_from_kernel(
    model: &SpectralModel,
    rho: &KernelSpec,
) -> Result<PerturbationMatrix> {
    let data = model
        .nystrom
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("model carries no Nystrom data".into()))?;
    rho.validate_symmetry()?;
    let nq = data.nodes.len();
    let m = model.dim();
    let sqrt_w: Vec<f64> = data.weights.iter().map(|w| w.sqrt()).collect();
    let r = SymMatrix::from_fn(nq, |i, j| {
        sqrt_w[i] * sqrt_w[j] * rho.evaluate(data.nodes[i], data.nodes[j])
    })?;
    // B = Psi^T R Psi with Psi = node-coordinate eigenvectors (columns)
    let mut rpsi = Mat::zeros(nq, m);
    for i in 0..nq {
        for k in 0..m {
            let mut acc = 0.0;
            for j in 0..nq {
                acc += r.get(i, j) * data.vectors[(j, k)];
            }
            rpsi[(i, k)] = acc;
        }
    }
    let mut b = vec![0.0; m * m];
    for n in 0..m {
        for k in n..m {
            let mut acc = 0.0;
            for i in 0..nq {
                acc += data.vectors[(i, n)] * rpsi[(i, k)];
            }
            b[n * m + k] = acc;
            b[k * m + n] = acc;
        }
    }
    PerturbationMatrix::new(
        SymMatrix::from_entries(m, &b)?,
        format!("kernel_rho({}, nq={nq})", rho.name()),
    )
}

/// Nystrom interpolation of the n-th eigenfunction (0-based): extends the
/// node values smoothly so custom kernels can be built from model
/// eigenfunctions.
pub fn eigenfunction_interpolant(
    model: &SpectralModel,
    kernel: &KernelSpec,
    n: usize,
) -> Result<impl Fn(f64) -> f64> {
    let data = model
        .nystrom
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("model carries no Nystrom data".into()))?;
    let lambda = model.lambda(n + 1);
    let nodes = data.nodes.clone();
    let coeff: Vec<f64> = (0..nodes.len())
        .map(|j| data.weights[j].sqrt() * data.vectors[(j, n)] / lambda)
        .collect();
    let kernel = kernel.clone();
    Ok(move |s: f64| -> f64 {
        nodes
            .iter()
            .zip(&coeff)
            .map(|(xj, cj)| cj * kernel.evaluate(s, *xj))
            .sum()
    })
}
