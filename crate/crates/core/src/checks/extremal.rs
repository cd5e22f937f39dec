//! Extremal Rayleigh-value bounds: for sign-definite B the extremizer values
//! stay within lambda_n (1 -+ c n^-(1+delta)), probed over a range of n with
//! the smallest admissible c and a growth-detecting slope criterion.

use super::{CheckReport, SignClass, GLOBAL_MARGIN};
use crate::asymptotics::log_log_slope;
use crate::error::{Error, Result};
use crate::linalg::SolverOptions;
use crate::models::{PerturbationMatrix, SpectralModel};
use std::collections::BTreeMap;

const SLOPE_LIMIT: f64 = 0.1;
const ZERO_FLOOR: f64 = 1e-13;

/// Fit the smallest c with |J_n - lambda_n| <= c lambda_n n^-(1+delta) over
/// the probe indices; passed when the scaled deviations t_n do not grow
/// (log-log slope <= 0.1). Errors with `WrongSign` unless B is sign-definite
/// (split first for mixed perturbations).
pub fn extremal_j_check(
    k: &SpectralModel,
    b: &PerturbationMatrix,
    delta: f64,
    probe_ns: &[usize],
    opts: &SolverOptions,
) -> Result<CheckReport> {
    if probe_ns.is_empty() {
        return Err(Error::InvalidInput("need at least one probe index".into()));
    }
    let sign = super::classify_sign(b, opts)?;
    let branch = match sign {
        SignClass::PositiveSemi | SignClass::Zero => "head",
        SignClass::NegativeSemi => "tail",
        SignClass::Mixed => {
            return Err(Error::WrongSign(
                "extremal bound needs a sign-definite perturbation; run split_sign first".into(),
            ))
        }
    };

    let mut ts = Vec::with_capacity(probe_ns.len());
    for &n in probe_ns {
        let point = if branch == "head" {
            super::head_extremizer(k, b, n, opts)?
        } else {
            super::tail_extremizer(k, b, n, opts)?
        };
        let lam = k.lambda(n);
        let t = (point.j - lam).abs() / lam * (n as f64).powf(1.0 + delta);
        ts.push((n, t));
    }
    let c_star = ts.iter().fold(0.0_f64, |m, (_, t)| m.max(*t));

    let mut fitted = BTreeMap::new();
    fitted.insert("c_star".to_string(), c_star);
    let mut margins: Vec<(usize, f64)> =
        ts.iter().map(|(n, t)| (*n, c_star - t)).collect();
    let mut notes = format!("{branch} branch over {} probe indices.", probe_ns.len());

    let positive: Vec<(f64, f64)> = ts
        .iter()
        .filter(|(_, t)| *t > ZERO_FLOOR)
        .map(|(n, t)| (*n as f64, *t))
        .collect();
    if positive.len() >= 3 {
        let ns: Vec<f64> = positive.iter().map(|(n, _)| *n).collect();
        let tv: Vec<f64> = positive.iter().map(|(_, t)| *t).collect();
        let slope = log_log_slope(&ns, &tv);
        fitted.insert("slope".to_string(), slope);
        margins.push((GLOBAL_MARGIN, SLOPE_LIMIT - slope));
        notes.push_str(&format!(" scaled-deviation slope {slope:.4} (limit {SLOPE_LIMIT})."));
    } else {
        notes.push_str(" deviations at rounding level; slope criterion skipped.");
    }
    Ok(CheckReport::from_margins("extremal_j", fitted, margins, 0.0, notes))
}
