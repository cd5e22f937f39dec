//! Numerical validators for each inequality and identity in the perturbation
//! estimates. Every check returns a [`CheckReport`]; inequalities with an
//! unspecified absolute constant are made falsifiable by fitting the smallest
//! admissible constant over the probed index range plus a regression-slope
//! criterion that detects growth.

mod conditions;
mod extremal;
mod homotopy;
mod localization;
mod rayleigh;
mod sandwich;
mod sums;

pub use conditions::{check_row_decay_condition, check_entry_decay_condition};
pub use extremal::extremal_j_check;
pub use homotopy::homotopy_check;
pub use localization::{localization_check, residual_radius, ResidualRadius};
pub use rayleigh::{head_extremizer, rayleigh, stationarity_check, tail_extremizer, RayleighPoint};
pub use sandwich::sandwich_check;
pub use sums::{coefficient_sum_check, gap_ratio_sum, GapRatioSum, LambdaSource, Side};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Index used for whole-check (not per-index) margin entries; per-index
/// entries are 1-based.
pub const GLOBAL_MARGIN: usize = 0;

/// Structured pass/fail result. A margin >= -slack means the criterion held
/// at that index; `passed` is exactly "every margin >= -slack".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub passed: bool,
    pub fitted_constants: BTreeMap<String, f64>,
    pub per_index_margins: Vec<(usize, f64)>,
    pub worst_index: Option<usize>,
    pub slack: f64,
    pub notes: String,
}

impl CheckReport {
    pub fn from_margins(
        check_name: impl Into<String>,
        fitted_constants: BTreeMap<String, f64>,
        per_index_margins: Vec<(usize, f64)>,
        slack: f64,
        notes: impl Into<String>,
    ) -> Self {
        let passed = per_index_margins.iter().all(|(_, m)| *m >= -slack);
        let worst_index = per_index_margins
            .iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(i, _)| *i);
        Self {
            check_name: check_name.into(),
            passed,
            fitted_constants,
            per_index_margins,
            worst_index,
            slack,
            notes: notes.into(),
        }
    }

    pub fn worst_margin(&self) -> Option<f64> {
        self.per_index_margins
            .iter()
            .map(|(_, m)| *m)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.fitted_constants.get(name).copied()
    }
}

/// Spectral norm of a perturbation, used by jump bounds and sign tests.
pub(crate) fn spectral_norm(
    b: &crate::models::PerturbationMatrix,
    opts: &crate::linalg::SolverOptions,
) -> crate::error::Result<f64> {
    let vals = crate::linalg::sym_eigenvalues(b.entries(), opts)?;
    Ok(vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Sign classification of B with a relative tolerance on the opposite tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Zero,
    PositiveSemi,
    NegativeSemi,
    Mixed,
}

pub fn classify_sign(
    b: &crate::models::PerturbationMatrix,
    opts: &crate::linalg::SolverOptions,
) -> crate::error::Result<SignClass> {
    let vals = crate::linalg::sym_eigenvalues(b.entries(), opts)?;
    let top = vals.first().copied().unwrap_or(0.0);
    let bottom = vals.last().copied().unwrap_or(0.0);
    let scale = top.abs().max(bottom.abs());
    let tol = 1e-12 * scale;
    Ok(if scale == 0.0 {
        SignClass::Zero
    } else if bottom >= -tol {
        SignClass::PositiveSemi
    } else if top <= tol {
        SignClass::NegativeSemi
    } else {
        SignClass::Mixed
    })
}
