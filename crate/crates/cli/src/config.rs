//! JSON experiment schema. Unknown keys are rejected so typos fail fast.

use serde::{Deserialize, Serialize};
use spectralab::asymptotics::FitWindow;
use spectralab::models::{
    AsymptoticLaw, KernelSpec, PerturbationMode, QuadratureRule, Wobble,
};
use spectralab::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub a: f64,
    pub b: f64,
    pub exponent: f64,
    /// omit for an exact law
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl LawConfig {
    pub fn build(&self) -> Result<AsymptoticLaw> {
        match self.delta {
            Some(d) => AsymptoticLaw::new(self.a, self.b, self.exponent, d),
            None => AsymptoticLaw::exact(self.a, self.b, self.exponent),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WobbleConfig {
    None,
    Deterministic { amplitude: f64 },
    Random { amplitude: f64, seed: u64 },
}

impl WobbleConfig {
    pub fn build(&self) -> Wobble {
        match *self {
            WobbleConfig::None => Wobble::None,
            WobbleConfig::Deterministic { amplitude } => Wobble::Deterministic { amplitude },
            WobbleConfig::Random { amplitude, seed } => Wobble::Random { amplitude, seed },
        }
    }
}

fn default_wobble() -> WobbleConfig {
    WobbleConfig::None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    BrownianMotion,
    BrownianBridge,
    /// expression over s and t in the documented mini-grammar
    Custom { name: String, expr: String },
}

impl KernelConfig {
    pub fn build(&self) -> Result<KernelSpec> {
        match self {
            KernelConfig::BrownianMotion => Ok(KernelSpec::BrownianMotion),
            KernelConfig::BrownianBridge => Ok(KernelSpec::BrownianBridge),
            KernelConfig::Custom { name, expr } => KernelSpec::custom(name.clone(), expr),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleConfig {
    GaussLegendre,
    Midpoint,
}

impl RuleConfig {
    pub fn build(&self) -> QuadratureRule {
        match self {
            RuleConfig::GaussLegendre => QuadratureRule::GaussLegendre,
            RuleConfig::Midpoint => QuadratureRule::Midpoint,
        }
    }
}

fn default_rule() -> RuleConfig {
    RuleConfig::GaussLegendre
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Diagonal {
        law: LawConfig,
        n: usize,
        #[serde(default = "default_wobble")]
        wobble: WobbleConfig,
    },
    TwoSequence {
        law1: LawConfig,
        law2: LawConfig,
        n: usize,
    },
    Nystrom {
        kernel: KernelConfig,
        n: usize,
        #[serde(default = "default_rule")]
        rule: RuleConfig,
    },
}

impl ModelConfig {
    pub fn dim_guard(&self) -> Result<()> {
        let n = match self {
            ModelConfig::Diagonal { n, .. }
            | ModelConfig::TwoSequence { n, .. }
            | ModelConfig::Nystrom { n, .. } => *n,
        };
        if n > 5000 {
            return Err(Error::InvalidInput(format!(
                "model dimension {n} exceeds the dense-solve guard of 5000"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationConfig {
    None,
    RankOne {
        mode: ModeConfig,
        sigma: f64,
        delta: f64,
    },
    RandomSign {
        sigma: f64,
        delta: f64,
        seed: u64,
    },
    /// integral-operator perturbation, Nystrom models only
    Kernel { rho: KernelConfig },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    RowDecay,
    EntryDecay,
}

impl ModeConfig {
    pub fn build(&self) -> PerturbationMode {
        match self {
            ModeConfig::RowDecay => PerturbationMode::RowDecay,
            ModeConfig::EntryDecay => PerturbationMode::EntryDecay,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_homotopy_steps")]
    pub homotopy_steps: usize,
}

fn default_rtol() -> f64 {
    1e-10
}

fn default_homotopy_steps() -> usize {
    11
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { rtol: default_rtol(), homotopy_steps: default_homotopy_steps() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// [n_min, n_max]; defaults to the standard head/tail-excluding window
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
    /// defaults to the model law's exponent, else estimated from the values
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_b: Option<f64>,
}

impl FitConfig {
    pub fn window_for(&self, dim: usize) -> FitWindow {
        match self.window {
            Some([lo, hi]) => FitWindow::new(lo, hi),
            None => FitWindow::default_for(dim),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    RowDecayCondition { delta: f64 },
    EntryDecayCondition { delta: f64 },
    Localization { delta: f64 },
    Sandwich,
    /// heads run against B (or its positive part when B is mixed), tails
    /// against B (or its negative part)
    Stationarity {
        #[serde(default)]
        heads: Vec<usize>,
        #[serde(default)]
        tails: Vec<usize>,
    },
    CoefficientSums {
        delta: f64,
        #[serde(default)]
        heads: Vec<usize>,
        #[serde(default)]
        tails: Vec<usize>,
    },
    GapRatioSumBounds {
        delta: f64,
        c: f64,
        ns: Vec<usize>,
    },
    ExtremalJ {
        delta: f64,
        ns: Vec<usize>,
    },
    Homotopy,
}

impl CheckConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CheckConfig::RowDecayCondition { .. } => "row_decay_condition",
            CheckConfig::EntryDecayCondition { .. } => "entry_decay_condition",
            CheckConfig::Localization { .. } => "localization",
            CheckConfig::Sandwich => "sandwich",
            CheckConfig::Stationarity { .. } => "stationarity",
            CheckConfig::CoefficientSums { .. } => "coefficient_sums",
            CheckConfig::GapRatioSumBounds { .. } => "gap_ratio_sum_bounds",
            CheckConfig::ExtremalJ { .. } => "extremal_j",
            CheckConfig::Homotopy => "homotopy",
        }
    }

    /// Sweep deltas override the declared delta where one is carried.
    pub fn with_delta(&self, d: f64) -> CheckConfig {
        let mut c = self.clone();
        match &mut c {
            CheckConfig::RowDecayCondition { delta }
            | CheckConfig::EntryDecayCondition { delta }
            | CheckConfig::Localization { delta }
            | CheckConfig::CoefficientSums { delta, .. }
            | CheckConfig::GapRatioSumBounds { delta, .. }
            | CheckConfig::ExtremalJ { delta, .. } => *delta = d,
            _ => {}
        }
        c
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub directory: String,
    /// any of "json", "csv"
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_out_dir() -> String {
    "out".to_string()
}

fn default_formats() -> Vec<String> {
    vec!["json".to_string()]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_out_dir(), formats: default_formats() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(src: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(src)
            .map_err(|e| anyhow::anyhow!("CONFIG_INVALID: {e}"))?;
        cfg.model
            .dim_guard()
            .map_err(|e| anyhow::anyhow!("CONFIG_INVALID: {e}"))?;
        Ok(cfg)
    }

    /// CLI --seed override: replaces every seed the config carries.
    pub fn override_seed(&mut self, seed: u64) {
        if let ModelConfig::Diagonal { wobble: WobbleConfig::Random { seed: s, .. }, .. } =
            &mut self.model
        {
            *s = seed;
        }
        if let PerturbationConfig::RandomSign { seed: s, .. } = &mut self.perturbation {
            *s = seed;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub grid: SweepGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// One sweep point: the grid values applied (None = base kept) and the
/// resulting config.
pub type SweepPoint = (Option<f64>, Option<f64>, Option<usize>, ExperimentConfig);

impl SweepConfig {
    pub fn parse(src: &str) -> anyhow::Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(src)
            .map_err(|e| anyhow::anyhow!("CONFIG_INVALID: {e}"))?;
        cfg.base
            .model
            .dim_guard()
            .map_err(|e| anyhow::anyhow!("CONFIG_INVALID: {e}"))?;
        Ok(cfg)
    }

    /// Cartesian product of the grid over the base config. Empty grid axes
    /// keep the base value, so an empty grid is the 1-point sweep.
    pub fn points(&self) -> Vec<SweepPoint> {
        let sigmas: Vec<Option<f64>> = if self.grid.sigma.is_empty() {
            vec![None]
        } else {
            self.grid.sigma.iter().map(|&s| Some(s)).collect()
        };
        let deltas: Vec<Option<f64>> = if self.grid.delta.is_empty() {
            vec![None]
        } else {
            self.grid.delta.iter().map(|&d| Some(d)).collect()
        };
        let ns: Vec<Option<usize>> = if self.grid.n.is_empty() {
            vec![None]
        } else {
            self.grid.n.iter().map(|&n| Some(n)).collect()
        };
        let mut out = Vec::new();
        for &sv in &sigmas {
            for &dv in &deltas {
                for &nv in &ns {
                    let mut cfg = self.base.clone();
                    if let Some(n) = nv {
                        match &mut cfg.model {
                            ModelConfig::Diagonal { n: m, .. }
                            | ModelConfig::TwoSequence { n: m, .. }
                            | ModelConfig::Nystrom { n: m, .. } => *m = n,
                        }
                        // an explicit window may no longer fit the new size
                        if let Some([_, hi]) = cfg.fit.window {
                            if hi > n {
                                cfg.fit.window = None;
                            }
                        }
                    }
                    if let Some(s) = sv {
                        match &mut cfg.perturbation {
                            PerturbationConfig::RankOne { sigma, .. }
                            | PerturbationConfig::RandomSign { sigma, .. } => *sigma = s,
                            _ => {}
                        }
                    }
                    if let Some(d) = dv {
                        match &mut cfg.perturbation {
                            PerturbationConfig::RankOne { delta, .. }
                            | PerturbationConfig::RandomSign { delta, .. } => *delta = d,
                            _ => {}
                        }
                        cfg.checks = cfg.checks.iter().map(|c| c.with_delta(d)).collect();
                    }
                    out.push((sv, dv, nv, cfg));
                }
            }
        }
        out
    }
}
