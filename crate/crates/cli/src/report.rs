//! Report assembly and file emission: canonical JSON (byte-identical across
//! runs of the same config), CSV views, and columnar plot-data files.

use crate::config::ExperimentConfig;
use crate::runner::RunArtifacts;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use spectralab::asymptotics::{ComparisonVerdict, FitResult, TwoSequenceFit};
use spectralab::checks::CheckReport;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub model_dim: usize,
    pub exponent_used: Option<f64>,
    pub base_fit: Option<FitResult>,
    pub perturbed_fit: Option<FitResult>,
    pub base_two_sequence: Option<TwoSequenceFit>,
    pub perturbed_two_sequence: Option<TwoSequenceFit>,
    /// Single-sequence verdict, or the odd-rank verdict for two-sequence runs.
    pub verdict: Option<ComparisonVerdict>,
    pub verdict_even: Option<ComparisonVerdict>,
    pub checks: Vec<CheckReport>,
    pub error: Option<String>,
    /// File names written next to the report, relative to the output directory.
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn errored(config: ExperimentConfig, message: String) -> Self {
        Self {
            config,
            model_dim: 0,
            exponent_used: None,
            base_fit: None,
            perturbed_fit: None,
            base_two_sequence: None,
            perturbed_two_sequence: None,
            verdict: None,
            verdict_even: None,
            checks: Vec::new(),
            error: Some(message),
            artifacts: Vec::new(),
        }
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).context("serializing report")?;
        s.push('\n');
        Ok(s)
    }
}

/// One row of a sweep summary.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sigma: Option<f64>,
    pub delta: Option<f64>,
    pub n: usize,
    pub delta_a: Option<f64>,
    pub delta_b: Option<f64>,
    pub c2_star: Option<f64>,
    pub passed_count: usize,
    pub check_count: usize,
    pub error: String,
}

/// 17 significant digits: exact round-trip for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn sweep_summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("sigma,delta,n,delta_a,delta_b,c2_star,passed_count,check_count,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_opt(r.sigma),
            fmt_opt(r.delta),
            r.n,
            fmt_opt(r.delta_a),
            fmt_opt(r.delta_b),
            fmt_opt(r.c2_star),
            r.passed_count,
            r.check_count,
            csv_escape(&r.error),
        );
    }
    out
}

fn checks_csv(checks: &[CheckReport]) -> String {
    let mut out = String::from("check,passed,worst_margin,worst_index,slack,constants,notes\n");
    for c in checks {
        let consts = c
            .fitted_constants
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt_f64(*v)))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.check_name,
            c.passed,
            fmt_opt(c.worst_margin()),
            c.worst_index.map(|i| i.to_string()).unwrap_or_default(),
            fmt_f64(c.slack),
            csv_escape(&consts),
            csv_escape(&c.notes),
        );
    }
    out
}

fn fits_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("which,a_hat,b_hat,exponent,delta_hat,c_hat,rmse,n_min,n_max\n");
    let mut push = |which: &str, f: &FitResult| {
        let (dh, ch) = match f.remainder {
            spectralab::asymptotics::RemainderEstimate::Exact => (None, None),
            spectralab::asymptotics::RemainderEstimate::PowerLaw { delta, constant } => {
                (Some(delta), Some(constant))
            }
        };
        let _ = writeln!(
            out,
            "{which},{},{},{},{},{},{},{},{}",
            fmt_f64(f.a_hat),
            fmt_f64(f.b_hat),
            fmt_f64(f.exponent_used),
            fmt_opt(dh),
            fmt_opt(ch),
            fmt_f64(f.rmse),
            f.window.n_min,
            f.window.n_max,
        );
    };
    if let Some(f) = &report.base_fit {
        push("base", f);
    }
    if let Some(f) = &report.perturbed_fit {
        push("perturbed", f);
    }
    if let Some(t) = &report.base_two_sequence {
        push("base_odd", &t.odd);
        push("base_even", &t.even);
    }
    if let Some(t) = &report.perturbed_two_sequence {
        push("perturbed_odd", &t.odd);
        push("perturbed_even", &t.even);
    }
    out
}

/// Columnar plot data. The spectrum file carries
/// (n, lambda_n, bold_lambda_n, mu_base, mu_pert, residual_base, residual_pert)
/// with residuals taken against each fit's own line; the localization file
/// carries the interval built from the fitted c2*.
fn spectrum_csv(art: &RunArtifacts) -> Option<String> {
    let model = art.model.as_ref()?;
    let pert = art.perturbed.as_ref()?;
    let exponent = art.report.exponent_used?;
    let line_of = |f: &FitResult| (f.a_hat, f.b_hat);
    // two-sequence runs use the per-parity residual files instead
    let (base_line, pert_line) = match (&art.report.base_fit, &art.report.perturbed_fit) {
        (Some(b), Some(p)) => (line_of(b), line_of(p)),
        _ => return None,
    };
    let mut out = String::from(
        "n,lambda_base,lambda_perturbed,mu_base,mu_perturbed,residual_base,residual_perturbed\n",
    );
    for i in 0..model.dim() {
        let n = i + 1;
        let lb = model.lambda(n);
        let lp = pert.values[i];
        let mu_b = lb.powf(-1.0 / exponent);
        let mu_p = lp.powf(-1.0 / exponent);
        let rb = mu_b - (base_line.0 * n as f64 + base_line.1);
        let rp = mu_p - (pert_line.0 * n as f64 + pert_line.1);
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{},{}",
            fmt_f64(lb),
            fmt_f64(lp),
            fmt_f64(mu_b),
            fmt_f64(mu_p),
            fmt_f64(rb),
            fmt_f64(rp),
        );
    }
    Some(out)
}

fn two_sequence_residual_csv(art: &RunArtifacts, parity_odd: bool) -> Option<String> {
    let model = art.model.as_ref()?;
    let pert = art.perturbed.as_ref()?;
    let exponent = art.report.exponent_used?;
    let base = art.report.base_two_sequence.as_ref()?;
    let fit = if parity_odd { &base.odd } else { &base.even };
    let pfit = art.report.perturbed_two_sequence.as_ref()?;
    let pfit = if parity_odd { &pfit.odd } else { &pfit.even };
    let mut out = String::from("n,mu_base,mu_perturbed,residual_base,residual_perturbed\n");
    for i in 0..model.dim() {
        let n = i + 1;
        if (n % 2 == 1) != parity_odd {
            continue;
        }
        let mu_b = model.lambda(n).powf(-1.0 / exponent);
        let mu_p = pert.values[i].powf(-1.0 / exponent);
        let _ = writeln!(
            out,
            "{n},{},{},{},{}",
            fmt_f64(mu_b),
            fmt_f64(mu_p),
            fmt_f64(mu_b - (fit.a_hat * n as f64 + fit.b_hat)),
            fmt_f64(mu_p - (pfit.a_hat * n as f64 + pfit.b_hat)),
        );
    }
    Some(out)
}

fn localization_csv(art: &RunArtifacts) -> Option<String> {
    let model = art.model.as_ref()?;
    let pert = art.perturbed.as_ref()?;
    let loc = art
        .report
        .checks
        .iter()
        .find(|c| c.check_name == "localization")?;
    let c2 = loc.constant("c2_star")?;
    let delta = art.report.config.checks.iter().find_map(|c| match c {
        crate::config::CheckConfig::Localization { delta } => Some(*delta),
        _ => None,
    })?;
    let mut out = String::from("n,delta_lower,delta_upper,lambda_perturbed\n");
    for i in 0..model.dim() {
        let n = i + 1;
        let lam = model.lambda(n);
        let half = c2 * (n as f64).powf(-(1.0 + delta));
        let _ = writeln!(
            out,
            "{n},{},{},{}",
            fmt_f64(lam * (1.0 - half)),
            fmt_f64(lam * (1.0 + half)),
            fmt_f64(pert.values[i]),
        );
    }
    Some(out)
}

/// Write the report plus its sidecar files; returns the final report (with
/// the artifact list filled in) after writing it as canonical JSON.
pub fn emit(
    art: &mut RunArtifacts,
    dir: &Path,
    formats: &[String],
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut artifacts = Vec::new();

    let json_wanted = formats.iter().any(|f| f == "json") || formats.is_empty();
    let csv_wanted = formats.iter().any(|f| f == "csv");

    if csv_wanted {
        fs::write(dir.join("checks.csv"), checks_csv(&art.report.checks))?;
        artifacts.push("checks.csv".to_string());
        fs::write(dir.join("fits.csv"), fits_csv(&art.report))?;
        artifacts.push("fits.csv".to_string());
    }
    if let Some(body) = spectrum_csv(art) {
        fs::write(dir.join("spectrum.csv"), body)?;
        artifacts.push("spectrum.csv".to_string());
    }
    if art.report.base_two_sequence.is_some() {
        if let Some(body) = two_sequence_residual_csv(art, true) {
            fs::write(dir.join("residuals_odd.csv"), body)?;
            artifacts.push("residuals_odd.csv".to_string());
        }
        if let Some(body) = two_sequence_residual_csv(art, false) {
            fs::write(dir.join("residuals_even.csv"), body)?;
            artifacts.push("residuals_even.csv".to_string());
        }
    }
    if let Some(body) = localization_csv(art) {
        fs::write(dir.join("localization.csv"), body)?;
        artifacts.push("localization.csv".to_string());
    }

    // timings are wall-clock and live outside the canonical report
    let timings: serde_json::Value = art
        .timings
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::json!(v)))
        .collect::<serde_json::Map<_, _>>()
        .into();
    fs::write(dir.join("timings.json"), serde_json::to_string_pretty(&timings)?)?;

    art.report.artifacts = artifacts;
    if json_wanted {
        fs::write(dir.join("report.json"), art.report.to_canonical_json()?)?;
    }
    Ok(())
}
