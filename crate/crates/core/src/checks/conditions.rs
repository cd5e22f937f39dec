//! Decay-hypothesis validators: row-norm decay ||B h_n|| <= c n^-(1+delta)
//! and entrywise decay |b_nm| <= c (nm)^-(1+delta)/2.
//!
//! Both report the smallest admissible constant c* over the available
//! indices; since the hypotheses leave c unspecified, failure means measured
//! growth: the log-log regression slope must stay within 0.1 of the required
//! decay rate.

use super::{CheckReport, GLOBAL_MARGIN};
use crate::asymptotics::log_log_slope;
use crate::models::PerturbationMatrix;
use std::collections::BTreeMap;

const SLOPE_GRACE: f64 = 0.1;

/// `scaled` holds t_n = (decay quantity) * n^exponent, which the hypothesis
/// requires to stay bounded; c* is its maximum and the per-index margins
/// c* - t_n are exact in floating point. The slope criterion is applied to
/// the raw quantity t_n n^-exponent, equivalently slope(log t) - exponent.
fn decay_report(
    name: &str,
    delta: f64,
    exponent: f64,
    scaled: Vec<(usize, f64)>,
) -> CheckReport {
    let c_star = scaled.iter().fold(0.0_f64, |m, (_, t)| m.max(*t));
    let mut fitted = BTreeMap::new();
    fitted.insert("c_star".to_string(), c_star);

    let mut margins: Vec<(usize, f64)> =
        scaled.iter().map(|(n, t)| (*n, c_star - t)).collect();

    let positive: Vec<(f64, f64)> = scaled
        .iter()
        .filter(|(_, t)| *t > 0.0)
        .map(|(n, t)| (*n as f64, *t))
        .collect();
    let mut notes = format!("delta = {delta}.");
    if positive.len() >= 10 {
        let ns: Vec<f64> = positive.iter().map(|(n, _)| *n).collect();
        let ts: Vec<f64> = positive.iter().map(|(_, t)| *t).collect();
        // slope of the raw decay quantity = slope of the scaled one minus
        // the exponent (exact by linearity of the regression)
        let raw_slope = log_log_slope(&ns, &ts) - exponent;
        let required = -exponent + SLOPE_GRACE;
        fitted.insert("slope".to_string(), raw_slope);
        fitted.insert("required_slope".to_string(), required);
        margins.push((GLOBAL_MARGIN, required - raw_slope));
        notes.push_str(&format!(
            " decay slope {raw_slope:.4} vs required <= {required:.4}."
        ));
    } else {
        notes.push_str(" too few nonzero rows for a slope regression; decay accepted.");
    }
    CheckReport::from_margins(name, fitted, margins, 0.0, notes)
}

/// Row-norm decay check: r_n = ||column n of B||, c* = max r_n n^(1+delta),
/// passed unless the regression slope of log r_n on log n exceeds
/// -(1+delta) + 0.1.
pub fn check_row_decay_condition(b: &PerturbationMatrix, delta: f64) -> CheckReport {
    let n = b.dim();
    let exponent = 1.0 + delta;
    let scaled: Vec<(usize, f64)> = (0..n)
        .map(|i| (i + 1, b.column_norm(i) * ((i + 1) as f64).powf(exponent)))
        .collect();
    decay_report("row_decay_condition", delta, exponent, scaled)
}

/// Entrywise decay check: c* = max |b_nm| (nm)^(1+delta)/2, slope criterion on
/// max_m |b_nm| m^(1+delta)/2 against n.
pub fn check_entry_decay_condition(b: &PerturbationMatrix, delta: f64) -> CheckReport {
    let n = b.dim();
    let half = (1.0 + delta) / 2.0;
    let scaled: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let mut row_max = 0.0_f64;
            for j in 0..n {
                row_max = row_max.max(b.get(i, j).abs() * ((j + 1) as f64).powf(half));
            }
            (i + 1, row_max * ((i + 1) as f64).powf(half))
        })
        .collect();
    decay_report("entry_decay_condition", delta, half, scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        build_rank_one_perturbation, build_random_sign_perturbation, PerturbationMode,
    };

    #[test]
    fn zero_perturbation_passes_with_zero_constant() {
        let b = PerturbationMatrix::zero(30);
        let rep = check_row_decay_condition(&b, 1.0);
        assert!(rep.passed);
        assert_eq!(rep.constant("c_star"), Some(0.0));
        let rep = check_entry_decay_condition(&b, 1.0);
        assert!(rep.passed);
        assert_eq!(rep.constant("c_star"), Some(0.0));
    }

    #[test]
    fn row_decay_mode_passes_row_decay_check() {
        let b = build_rank_one_perturbation(0.1, 1.0, 100, PerturbationMode::RowDecay).unwrap();
        let rep = check_row_decay_condition(&b, 1.0);
        assert!(rep.passed, "{rep:?}");
        let slope = rep.constant("slope").unwrap();
        assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn entry_decay_mode_fails_row_decay_check_at_same_delta() {
        // row norms decay like n^-1, far slower than the required n^-2
        let b = build_rank_one_perturbation(0.1, 1.0, 100, PerturbationMode::EntryDecay).unwrap();
        let rep = check_row_decay_condition(&b, 1.0);
        assert!(!rep.passed);
        let slope = rep.constant("slope").unwrap();
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn entry_decay_mode_saturates_entry_decay_bound() {
        let b = build_rank_one_perturbation(0.1, 1.0, 80, PerturbationMode::EntryDecay).unwrap();
        let rep = check_entry_decay_condition(&b, 1.0);
        assert!(rep.passed);
        let c = rep.constant("c_star").unwrap();
        assert!((c - 0.1).abs() <= 1e-12 * 0.1, "c* {c}");
    }

    #[test]
    fn slow_entry_decay_fails_entry_decay_check() {
        // entries (nm)^-1/4 probed against delta = 1
        let entries = crate::linalg::SymMatrix::from_fn(60, |i, j| {
            0.02 * ((i + 1) as f64 * (j + 1) as f64).powf(-0.25)
        })
        .unwrap();
        let b = PerturbationMatrix::new(entries, "slow-decay").unwrap();
        let rep = check_entry_decay_condition(&b, 1.0);
        assert!(!rep.passed);
    }

    #[test]
    fn random_sign_passes_entry_decay_at_matching_delta() {
        for seed in [1u64, 7, 42] {
            let b = build_random_sign_perturbation(0.05, 0.5, 200, seed).unwrap();
            let rep = check_entry_decay_condition(&b, 0.5);
            assert!(rep.passed, "seed {seed}: {:?}", rep.fitted_constants);
            let c = rep.constant("c_star").unwrap();
            assert!((c - 0.05).abs() <= 1e-12);
            // per-index margins are exact: never negative
            assert!(rep.per_index_margins.iter().all(|(_, m)| *m >= 0.0));
        }
    }
}
