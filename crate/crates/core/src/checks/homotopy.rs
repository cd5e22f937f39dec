//! Homotopy-path validation: first-order jump bounds per index and
//! monotonicity for sign-definite perturbations.

use super::{CheckReport, GLOBAL_MARGIN};
use crate::error::Result;
use crate::linalg::SolverOptions;
use crate::models::{PerturbationMatrix, SpectralModel};
use std::collections::BTreeMap;

/// First-order jump bound check over a homotopy: per index,
/// J_n <= ||B|| / (1 - ||B||) * lambda_n * d_eps * (1 + margin), and for
/// sign-definite B the paths must be monotone.
pub fn homotopy_check(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    steps: usize,
    opts: &SolverOptions,
) -> Result<CheckReport> {
    let track = crate::gen_eigen::homotopy_track(k, b, steps, opts)?;
    let norm_b = super::spectral_norm(b, opts)?;
    let sign = super::classify_sign(b, opts)?;
    let de = 1.0 / (steps - 1) as f64;
    let mut margins = Vec::with_capacity(k.dim());
    if norm_b < 1.0 {
        let factor = norm_b / (1.0 - norm_b) * de * 1.1;
        for (i, lam) in k.lambdas().iter().enumerate() {
            let bound = factor * lam;
            // relative slack of the bound; exact-zero jumps give full margin
            margins.push((i + 1, (bound - track.max_step_jump[i]) / lam));
        }
    }
    // independent per-step solves differ by O(eps ||.||) absolute, which is
    // far above the true path movement at the bottom of the spectrum
    let fp_allowance = 64.0 * f64::EPSILON * k.lambda(1);
    let mut notes = String::new();
    match sign {
        super::SignClass::PositiveSemi | super::SignClass::Zero => {
            let mut worst = f64::NEG_INFINITY;
            for w in track.spectra.windows(2) {
                for i in 0..k.dim() {
                    let increase = w[1].values[i] - w[0].values[i] - fp_allowance;
                    worst = worst.max(increase / k.lambda(i + 1));
                }
            }
            margins.push((GLOBAL_MARGIN, -worst));
            notes.push_str("positive branch: paths checked monotone nonincreasing.");
        }
        super::SignClass::NegativeSemi => {
            let mut worst = f64::NEG_INFINITY;
            for w in track.spectra.windows(2) {
                for i in 0..k.dim() {
                    let decrease = w[0].values[i] - w[1].values[i] - fp_allowance;
                    worst = worst.max(decrease / k.lambda(i + 1));
                }
            }
            margins.push((GLOBAL_MARGIN, -worst));
            notes.push_str("negative branch: paths checked monotone nondecreasing.");
        }
        super::SignClass::Mixed => {
            notes.push_str("mixed-sign perturbation: monotonicity not required.");
        }
    }
    if !track.crossings.is_empty() {
        notes.push_str(&format!(
            " CROSSING_DETECTED at {} (step, index) pairs.",
            track.crossings.len()
        ));
    }
    let mut fitted = BTreeMap::new();
    fitted.insert("spectral_norm_b".to_string(), norm_b);
    fitted.insert(
        "max_jump".to_string(),
        track.max_step_jump.iter().fold(0.0_f64, |m, v| m.max(*v)),
    );
    Ok(CheckReport::from_margins("homotopy", fitted, margins, 0.0, notes))
}
