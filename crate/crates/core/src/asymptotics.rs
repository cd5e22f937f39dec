//! Two-term fits mu_n = lambda_n^(-1/B) = a n + b + O(n^-delta): parameter
//! recovery, remainder-exponent estimation, and preservation verdicts.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// 1-based inclusive index window of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub n_min: usize,
    pub n_max: usize,
}

impl FitWindow {
    pub fn new(n_min: usize, n_max: usize) -> Self {
        Self { n_min, n_max }
    }

    pub fn len(&self) -> usize {
        self.n_max + 1 - self.n_min
    }

    pub fn is_empty(&self) -> bool {
        self.n_max < self.n_min
    }

    /// Head (pre-asymptotic) and tail (truncation-error) regions excluded.
    pub fn default_for(n: usize) -> Self {
        let n_min = 10.max(n / 40);
        let n_max = (n / 2).min(n.saturating_sub(10));
        Self { n_min, n_max }
    }
}

/// Estimated remainder envelope. `Exact` flags residuals at rounding level
/// (below 1e-10), where reporting an exponent would be spurious.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RemainderEstimate {
    Exact,
    PowerLaw { delta: f64, constant: f64 },
}

/// Result of a two-term least-squares fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub a_hat: f64,
    pub b_hat: f64,
    pub exponent_used: f64,
    pub remainder: RemainderEstimate,
    pub window: FitWindow,
    /// mu_n - (a_hat n + b_hat) for n across the window.
    pub residuals: Vec<f64>,
    pub rmse: f64,
}

impl FitResult {
    pub fn delta_hat(&self) -> Option<f64> {
        match self.remainder {
            RemainderEstimate::Exact => None,
            RemainderEstimate::PowerLaw { delta, .. } => Some(delta),
        }
    }
}

/// Verdict on whether a perturbation preserved the two-term asymptotics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub delta_a: f64,
    pub delta_b: f64,
    pub preserved: bool,
    pub tol_a: f64,
    pub tol_b: f64,
}

/// Default slope tolerance for verdicts: 5e-3 * a.
pub fn default_tol_a(a: f64) -> f64 {
    5e-3 * a.abs()
}

/// Default intercept tolerance for verdicts: 5e-2 * max(1, |b|).
pub fn default_tol_b(b: f64) -> f64 {
    5e-2 * b.abs().max(1.0)
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - xm) * (y - ym);
        sxx += (x - xm) * (x - xm);
    }
    let slope = sxy / sxx;
    (slope, ym - slope * xm)
}

pub(crate) fn log_log_slope(ns: &[f64], vals: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    ols(&xs, &ys).0
}

const EXACT_FLOOR: f64 = 1e-10;

/// Core fit on explicit (n, mu) samples.
fn fit_line_with_remainder(ns: &[f64], mus: &[f64], exponent: f64, window: FitWindow) -> FitResult {
    let (a_hat, b_hat) = ols(ns, mus);
    let residuals: Vec<f64> = ns
        .iter()
        .zip(mus)
        .map(|(n, mu)| mu - (a_hat * n + b_hat))
        .collect();
    let rmse =
        (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let max_abs = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));

    let remainder = if max_abs < EXACT_FLOOR {
        RemainderEstimate::Exact
    } else {
        let delta = estimate_remainder_exponent(ns, mus, &residuals);
        let constant = residuals
            .iter()
            .zip(ns)
            .fold(0.0_f64, |m, (r, n)| m.max(r.abs() * n.powf(delta)));
        RemainderEstimate::PowerLaw { delta, constant }
    };
    FitResult { a_hat, b_hat, exponent_used: exponent, remainder, window, residuals, rmse }
}

/// Remainder exponent: profile the nonlinear model a n + b + c n^-delta over
/// a delta grid (linear in (a,b,c) for fixed delta) and keep the minimizer
/// when it actually explains the residuals; otherwise fall back to the
/// dominating-envelope slope, which handles sign-flipping remainders.
fn estimate_remainder_exponent(ns: &[f64], mus: &[f64], residuals: &[f64]) -> f64 {
    let rss2: f64 = residuals.iter().map(|r| r * r).sum();
    let mut best: Option<(f64, f64)> = None; // (rss, delta)
    let grid = 121;
    for g in 0..grid {
        let delta = 0.05 * (5.0_f64 / 0.05).powf(g as f64 / (grid - 1) as f64);
        if let Some(rss) = profile_rss(ns, mus, delta) {
            if best.is_none_or(|(b, _)| rss < b) {
                best = Some((rss, delta));
            }
        }
    }
    if let Some((rss3, delta)) = best {
        if rss3 <= 0.9 * rss2 {
            return delta;
        }
    }
    // dominating envelope: suffix running maximum of |residuals|
    let mut env = vec![0.0; residuals.len()];
    let mut running = 0.0_f64;
    for i in (0..residuals.len()).rev() {
        running = running.max(residuals[i].abs());
        env[i] = running;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &e) in env.iter().enumerate() {
        if e > EXACT_FLOOR {
            xs.push(ns[i]);
            ys.push(e);
        }
    }
    -log_log_slope(&xs, &ys)
}

/// RSS of the 3-parameter model over basis {n, 1, n^-delta} via normal
/// equations; None when the 3x3 system is numerically singular.
fn profile_rss(ns: &[f64], mus: &[f64], delta: f64) -> Option<f64> {
    let mut ata = [[0.0_f64; 3]; 3];
    let mut atb = [0.0_f64; 3];
    for (n, mu) in ns.iter().zip(mus) {
        let basis = [*n, 1.0, n.powf(-delta)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += basis[i] * basis[j];
            }
            atb[i] += basis[i] * mu;
        }
    }
    let coef = solve3(ata, atb)?;
    let mut rss = 0.0;
    for (n, mu) in ns.iter().zip(mus) {
        let fit = coef[0] * n + coef[1] + coef[2] * n.powf(-delta);
        rss += (mu - fit) * (mu - fit);
    }
    Some(rss)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for k in 0..3 {
        let mut piv = k;
        for r in k + 1..3 {
            if a[r][k].abs() > a[piv][k].abs() {
                piv = r;
            }
        }
        if a[piv][k] == 0.0 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for r in k + 1..3 {
            let m = a[r][k] / a[k][k];
            for c in k..3 {
                a[r][c] -= m * a[k][c];
            }
            b[r] -= m * b[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let mut s = b[k];
        for c in k + 1..3 {
            s -= a[k][c] * x[c];
        }
        if a[k][k] == 0.0 {
            return None;
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

fn window_samples(
    values: &[f64],
    exponent: f64,
    window: FitWindow,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if window.n_min < 2 || window.n_max > values.len() || window.is_empty() {
        return Err(Error::InvalidInput(format!(
            "window [{}, {}] invalid for {} values (n_min >= 2 required)",
            window.n_min,
            window.n_max,
            values.len()
        )));
    }
    if window.len() < 10 {
        return Err(Error::WindowTooSmall { points: window.len(), min: 10 });
    }
    let mut ns = Vec::with_capacity(window.len());
    let mut mus = Vec::with_capacity(window.len());
    for n in window.n_min..=window.n_max {
        let v = values[n - 1];
        if !(v > 0.0) {
            return Err(Error::NonpositiveValue { index: n, value: v });
        }
        ns.push(n as f64);
        mus.push(v.powf(-1.0 / exponent));
    }
    Ok((ns, mus))
}

/// Ordinary least-squares fit of mu_n = values_n^(-1/B) against a n + b over
/// the window, plus the remainder-envelope estimate.
pub fn fit_two_term(values: &[f64], exponent: f64, window: FitWindow) -> Result<FitResult> {
    if !(exponent > 0.0) {
        return Err(Error::InvalidInput(format!("exponent must be positive, got {exponent}")));
    }
    let (ns, mus) = window_samples(values, exponent, window)?;
    Ok(fit_line_with_remainder(&ns, &mus, exponent, window))
}

/// Power exponent B recovered from the decay of the values over the upper
/// half of the index range (slope of log lambda against log n, negated).
pub fn estimate_exponent(values: &[f64]) -> Result<f64> {
    if values.len() < 20 {
        return Err(Error::WindowTooSmall { points: values.len(), min: 20 });
    }
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonpositiveValue { index: i + 1, value: v });
        }
    }
    let n = values.len();
    let ns: Vec<f64> = (n / 2 + 1..=n).map(|k| k as f64).collect();
    let vals: Vec<f64> = values[n / 2..].to_vec();
    Ok(-log_log_slope(&ns, &vals))
}

/// Fits of the odd-rank and even-rank subsequences against the same global
/// rank variable, with the slope-consistency gap between them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSequenceFit {
    pub odd: FitResult,
    pub even: FitResult,
    pub slope_gap: f64,
}

/// Interleaved-sequence fit: odd ranks follow (2n-1)a + b1, even ranks 2na + b2,
/// both linear in the global rank with shared slope.
pub fn fit_two_sequence(
    values: &[f64],
    exponent: f64,
    window: FitWindow,
) -> Result<TwoSequenceFit> {
    if !(exponent > 0.0) {
        return Err(Error::InvalidInput(format!("exponent must be positive, got {exponent}")));
    }
    let (ns, mus) = window_samples(values, exponent, window)?;
    let mut parts: [(Vec<f64>, Vec<f64>); 2] = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    for (n, mu) in ns.iter().zip(&mus) {
        let parity = (*n as usize) % 2; // 1 = odd rank, 0 = even rank
        let slot = if parity == 1 { &mut parts[0] } else { &mut parts[1] };
        slot.0.push(*n);
        slot.1.push(*mu);
    }
    for (sub_ns, _) in &parts {
        if sub_ns.len() < 10 {
            return Err(Error::WindowTooSmall { points: sub_ns.len(), min: 10 });
        }
    }
    let odd = fit_line_with_remainder(&parts[0].0, &parts[0].1, exponent, window);
    let even = fit_line_with_remainder(&parts[1].0, &parts[1].1, exponent, window);
    let slope_gap = (odd.a_hat - even.a_hat).abs();
    Ok(TwoSequenceFit { odd, even, slope_gap })
}

/// Compare a base and a perturbed fit at the given tolerances.
pub fn compare_fits(
    base: &FitResult,
    perturbed: &FitResult,
    tol_a: f64,
    tol_b: f64,
) -> Result<ComparisonVerdict> {
    if base.exponent_used != perturbed.exponent_used {
        return Err(Error::IncompatibleFits(format!(
            "exponents differ: {} vs {}",
            base.exponent_used, perturbed.exponent_used
        )));
    }
    let delta_a = perturbed.a_hat - base.a_hat;
    let delta_b = perturbed.b_hat - base.b_hat;
    Ok(ComparisonVerdict {
        delta_a,
        delta_b,
        preserved: delta_a.abs() <= tol_a && delta_b.abs() <= tol_b,
        tol_a,
        tol_b,
    })
}
