//! Batch experiment runner. Exit codes: 0 = all selected checks passed,
//! 1 = at least one check failed, 2 = config or solver error.

mod config;
mod report;
mod runner;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use config::{ExperimentConfig, SweepConfig};
use runner::RunStatus;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spectralab", version, about = "Generalized-eigenproblem laboratory: solve, fit two-term asymptotics, and validate the perturbation estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override every seed the config carries
        #[arg(long)]
        seed: Option<u64>,
        /// json | csv | both (defaults to the config's formats)
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a sweep config (base experiment + grid over sigma, delta, n)
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit a two-term law to a column of eigenvalues
    Fit {
        /// text file: one value per line, '#' comments ignored
        values: PathBuf,
        #[arg(long)]
        exponent: Option<f64>,
        /// "n_min,n_max"
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run only the named checks of a config
    Check {
        config: PathBuf,
        /// comma-separated check names
        #[arg(long)]
        only: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a bundled demo: diagonal, two_sequence, brownian, bridge, violating
    Demo {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
}

fn demo_source(name: &str) -> Option<&'static str> {
    let key = name.trim_start_matches("demo_").trim_end_matches(".json");
    match key {
        "diagonal" => Some(include_str!("../configs/demo_diagonal.json")),
        "two_sequence" => Some(include_str!("../configs/demo_two_sequence.json")),
        "brownian" => Some(include_str!("../configs/demo_brownian.json")),
        "bridge" => Some(include_str!("../configs/demo_bridge.json")),
        "violating" => Some(include_str!("../configs/demo_violating.json")),
        _ => None,
    }
}

fn formats_from(flag: Option<&str>, cfg: &ExperimentConfig) -> Vec<String> {
    match flag {
        Some("both") => vec!["json".to_string(), "csv".to_string()],
        Some(f) => vec![f.to_string()],
        None => cfg.output.formats.clone(),
    }
}

fn init_workers(workers: Option<usize>) {
    if let Some(k) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

fn exec_run(
    mut cfg: ExperimentConfig,
    out: Option<PathBuf>,
    seed: Option<u64>,
    format: Option<&str>,
) -> Result<RunStatus> {
    if let Some(s) = seed {
        cfg.override_seed(s);
    }
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let formats = formats_from(format, &cfg);
    let mut art = runner::run_experiment(&cfg);
    report::emit(&mut art, &dir, &formats)?;
    let status = art.status();
    match status {
        RunStatus::Errored => eprintln!(
            "error: {}",
            art.report.error.as_deref().unwrap_or("unknown")
        ),
        _ => {
            for c in &art.report.checks {
                println!(
                    "{}: {}",
                    c.check_name,
                    if c.passed { "pass" } else { "FAIL" }
                );
            }
            if let Some(v) = &art.report.verdict {
                println!(
                    "two-term verdict: preserved={} (dA={:.3e}, dB={:.3e})",
                    v.preserved, v.delta_a, v.delta_b
                );
            }
            println!("report: {}", dir.join("report.json").display());
        }
    }
    Ok(status)
}

fn load_values(path: &Path) -> Result<Vec<f64>> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (ln, line) in body.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        // allow single-column CSV with a header row
        let field = line.split(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if ln == 0 => continue,
            Err(e) => bail!("line {}: cannot parse '{field}': {e}", ln + 1),
        }
    }
    if out.is_empty() {
        bail!("no values found in {}", path.display());
    }
    Ok(out)
}

fn parse_window(s: &str) -> Result<[usize; 2]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("window must be 'n_min,n_max'");
    }
    Ok([parts[0].trim().parse()?, parts[1].trim().parse()?])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(RunStatus::AllPassed) => ExitCode::from(0),
        Ok(RunStatus::SomeFailed) => ExitCode::from(1),
        Ok(RunStatus::Errored) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<RunStatus> {
    match cli.command {
        Command::Run { config, out, seed, format, workers } => {
            init_workers(workers);
            let src = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::parse(&src)?;
            exec_run(cfg, out, seed, format.as_deref())
        }
        Command::Check { config, only, out, seed, format, workers } => {
            init_workers(workers);
            let src = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::parse(&src)?;
            let names: Vec<&str> = only.split(',').map(|s| s.trim()).collect();
            for name in &names {
                if !cfg.checks.iter().any(|c| c.name() == *name) {
                    bail!("CONFIG_INVALID: check '{name}' not present in the config");
                }
            }
            cfg.checks.retain(|c| names.contains(&c.name()));
            exec_run(cfg, out, seed, format.as_deref())
        }
        Command::Sweep { config, out, seed, format, workers } => {
            let src = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = SweepConfig::parse(&src)?;
            if let Some(s) = seed {
                cfg.base.override_seed(s);
            }
            init_workers(workers.or(cfg.workers));
            let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.base.output.directory));
            let formats = formats_from(format.as_deref(), &cfg.base);
            let sweep = runner::run_sweep(&cfg);
            std::fs::create_dir_all(&dir)?;
            let mut worst = RunStatus::AllPassed;
            for (i, mut art) in sweep.runs.into_iter().enumerate() {
                let sub = dir.join(format!("point_{i:03}"));
                report::emit(&mut art, &sub, &formats)?;
                worst = match (worst, art.status()) {
                    (_, RunStatus::Errored) | (RunStatus::Errored, _) => RunStatus::Errored,
                    (_, RunStatus::SomeFailed) | (RunStatus::SomeFailed, _) => {
                        RunStatus::SomeFailed
                    }
                    _ => RunStatus::AllPassed,
                };
            }
            let summary = report::sweep_summary_csv(&sweep.rows);
            std::fs::write(dir.join("summary.csv"), summary)?;
            println!("sweep: {} points, summary at {}", sweep.rows.len(), dir.join("summary.csv").display());
            Ok(worst)
        }
        Command::Fit { values, exponent, window, out } => {
            let vals = load_values(&values)?;
            let window = window.as_deref().map(parse_window).transpose()?;
            let fit = runner::fit_values(&vals, exponent, window)?;
            let body = serde_json::to_string_pretty(&fit)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("fit.json"), format!("{body}\n"))?;
                    println!("fit: {}", dir.join("fit.json").display());
                }
                None => println!("{body}"),
            }
            Ok(RunStatus::AllPassed)
        }
        Command::Demo { name, out, format } => {
            let src = demo_source(&name)
                .with_context(|| format!("unknown demo '{name}'; available: diagonal, two_sequence, brownian, bridge, violating"))?;
            let cfg = ExperimentConfig::parse(src)?;
            let dir = out.unwrap_or_else(|| {
                PathBuf::from("out").join(format!("demo_{}", name.trim_start_matches("demo_")))
            });
            exec_run(cfg, Some(dir), None, format.as_deref())
        }
    }
}
