//! Min-max sandwich: with B = B_+ + B_-, the spectra of the three problems
//! satisfy bold_lambda_n^+ <= bold_lambda_n <= bold_lambda_n^- at every index.

use super::CheckReport;
use crate::error::Result;
use crate::gen_eigen::solve_generalized_values;
use crate::linalg::SolverOptions;
use crate::models::{split_sign, PerturbationMatrix, SpectralModel};
use std::collections::BTreeMap;

const SANDWICH_SLACK: f64 = 1e-10;

pub fn sandwich_check(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    opts: &SolverOptions,
) -> Result<CheckReport> {
    let (b_plus, b_minus) = split_sign(b, opts)?;
    let mid = solve_generalized_values(k, b, opts)?;
    let upper = solve_generalized_values(k, &b_minus, opts)?;
    let lower = solve_generalized_values(k, &b_plus, opts)?;

    // backward-stable solves carry O(eps ||.||) absolute error, which
    // dominates the stated relative slack at the bottom of the spectrum when
    // a branch degenerates to equality (one-sided B)
    let fp_allowance = 64.0 * f64::EPSILON * mid.values[0];
    let mut margins = Vec::with_capacity(k.dim());
    for i in 0..k.dim() {
        let m = ((mid.values[i] - lower.values[i]).min(upper.values[i] - mid.values[i])
            + fp_allowance)
            / mid.values[i];
        margins.push((i + 1, m));
    }
    let mut fitted = BTreeMap::new();
    fitted.insert(
        "split_norm_plus".to_string(),
        b_plus.entries().frobenius_norm(),
    );
    fitted.insert(
        "split_norm_minus".to_string(),
        b_minus.entries().frobenius_norm(),
    );
    Ok(CheckReport::from_margins(
        "sandwich",
        fitted,
        margins,
        SANDWICH_SLACK,
        String::new(),
    ))
}
