//! Residual localization: the interval around lambda_n of width
//! radius(n) = |||B h_n - lambda_n h_n||| / |||h_n||| must contain a
//! perturbed eigenvalue, and the intervals Delta_n built from the fitted
//! relative-deviation constant must eventually disjoin.

use super::{CheckReport, GLOBAL_MARGIN};
use crate::asymptotics::log_log_slope;
use crate::error::{Error, Result};
use crate::gen_eigen::{HMetric, PerturbedSpectrum};
use crate::linalg::solve_lower;
use crate::models::{PerturbationMatrix, SpectralModel};
use std::collections::BTreeMap;

/// Measured residual radius and its hypothesis-level bound
/// c1 lambda_n n^-(1+delta).
#[derive(Debug, Clone, Copy)]
pub struct ResidualRadius {
    pub radius: f64,
    pub bound: f64,
}

/// With G = I + B and the operator of the reduced problem acting as
/// G^{-1} diag(lambda), the residual at the unperturbed pair (lambda_n, h_n)
/// collapses to radius = lambda_n sqrt(Ginv_nn + G_nn - 2) / sqrt(G_nn).
fn radius_from_diag(lambda_n: f64, ginv_nn: f64, g_nn: f64) -> f64 {
    lambda_n * (ginv_nn + g_nn - 2.0).max(0.0).sqrt() / g_nn.sqrt()
}

/// Residual localization radius at index n (1-based) plus the bound built
/// from the smallest admissible row-norm constant at the declared delta.
pub fn residual_radius(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    n: usize,
    delta: f64,
) -> Result<ResidualRadius> {
    if n == 0 || n > k.dim() {
        return Err(Error::InvalidInput(format!("index {n} out of range 1..={}", k.dim())));
    }
    let metric = HMetric::new(b)?;
    let mut e = vec![0.0; k.dim()];
    e[n - 1] = 1.0;
    let y = solve_lower(metric.cholesky_factor(), &e);
    let ginv_nn: f64 = y.iter().map(|v| v * v).sum();
    let g_nn = metric.matrix().get(n - 1, n - 1);
    let radius = radius_from_diag(k.lambda(n), ginv_nn, g_nn);

    let c1 = super::check_row_decay_condition(b, delta)
        .constant("c_star")
        .unwrap_or(0.0);
    let bound = c1 * k.lambda(n) * (n as f64).powf(-(1.0 + delta));
    Ok(ResidualRadius { radius, bound })
}

/// Existence + disjointness check:
/// (i) every lambda_n has a perturbed eigenvalue within radius(n);
/// (ii) c2* = max_n |bold_lambda_n / lambda_n - 1| n^(1+delta) is fitted;
/// (iii) the intervals built from c2* disjoin from an onset n0 < N/2;
/// additionally the deviation decay slope must match the declared delta.
pub fn localization_check(
    base: &SpectralModel,
    perturbed: &PerturbedSpectrum,
    b: &PerturbationMatrix,
    delta: f64,
) -> Result<CheckReport> {
    let n_dim = base.dim();
    if perturbed.dim() != n_dim || b.dim() != n_dim {
        return Err(Error::DimensionMismatch(format!(
            "base {} vs perturbed {} vs B {}",
            n_dim,
            perturbed.dim(),
            b.dim()
        )));
    }
    let metric = HMetric::new(b)?;

    // diag of G^{-1} via one forward solve per column of the identity
    let mut margins = Vec::with_capacity(n_dim + 2);
    let mut radii = Vec::with_capacity(n_dim);
    for i in 0..n_dim {
        let mut e = vec![0.0; n_dim];
        e[i] = 1.0;
        let y = solve_lower(metric.cholesky_factor(), &e);
        let ginv_ii: f64 = y.iter().map(|v| v * v).sum();
        radii.push(radius_from_diag(
            base.lambda(i + 1),
            ginv_ii,
            metric.matrix().get(i, i),
        ));
    }

    // (i) existence against the sorted perturbed values; computed eigenvalues
    // carry O(eps ||.||) absolute error, so the measured gap gets the same
    // allowance
    let fp_allowance = 64.0 * f64::EPSILON * base.lambda(1);
    let vals = &perturbed.values;
    for (i, &radius) in radii.iter().enumerate() {
        let lam = base.lambda(i + 1);
        let gap = nearest_distance(vals, lam);
        margins.push((i + 1, (radius + fp_allowance - gap) / lam));
    }

    // (ii) fitted deviation constant and its decay slope
    let mut c2_star = 0.0_f64;
    let mut dev_ns = Vec::new();
    let mut dev_vals = Vec::new();
    for i in 0..n_dim {
        let dev = (vals[i] / base.lambda(i + 1) - 1.0).abs();
        c2_star = c2_star.max(dev * ((i + 1) as f64).powf(1.0 + delta));
        if dev > 1e-14 {
            dev_ns.push((i + 1) as f64);
            dev_vals.push(dev);
        }
    }

    let mut fitted = BTreeMap::new();
    fitted.insert("c2_star".to_string(), c2_star);
    let mut notes = String::new();
    if dev_ns.len() >= 10 {
        let slope = log_log_slope(&dev_ns, &dev_vals);
        let required = -(1.0 + delta) + 0.1;
        fitted.insert("deviation_slope".to_string(), slope);
        fitted.insert("required_slope".to_string(), required);
        margins.push((GLOBAL_MARGIN, required - slope));
        notes.push_str(&format!("deviation slope {slope:.4} vs required <= {required:.4}. "));
    } else {
        notes.push_str("deviations at rounding level; slope criterion skipped. ");
    }

    // (iii) disjointness onset for Delta_n built from c2*
    let n0 = disjointness_onset(base.lambdas(), c2_star, delta);
    fitted.insert("n0".to_string(), n0 as f64);
    margins.push((GLOBAL_MARGIN, (n_dim as f64) / 2.0 - n0 as f64));
    notes.push_str(&format!("disjointness onset n0 = {n0}."));

    Ok(CheckReport::from_margins("localization", fitted, margins, 0.0, notes))
}

/// Distance from x to the nearest entry of a descending-sorted list.
fn nearest_distance(sorted_desc: &[f64], x: f64) -> f64 {
    let pos = sorted_desc.partition_point(|&v| v > x);
    let mut best = f64::INFINITY;
    if pos < sorted_desc.len() {
        best = best.min((sorted_desc[pos] - x).abs());
    }
    if pos > 0 {
        best = best.min((sorted_desc[pos - 1] - x).abs());
    }
    best
}

/// Smallest n0 such that Delta_k and Delta_{k+1} are disjoint for all
/// k >= n0, with Delta_k = lambda_k (1 +- c2 k^-(1+delta)).
fn disjointness_onset(lambdas: &[f64], c2: f64, delta: f64) -> usize {
    let n = lambdas.len();
    let mut onset = 1;
    for k in 1..n {
        let lo_k = lambdas[k - 1] * (1.0 - c2 * (k as f64).powf(-(1.0 + delta)));
        let hi_next = lambdas[k] * (1.0 + c2 * ((k + 1) as f64).powf(-(1.0 + delta)));
        if lo_k <= hi_next {
            onset = k + 1;
        }
    }
    onset
}
