//! Subcommand implementations: simulate, calibrate, bounds, phase.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sparsedetect::{
    default_tau, kl_chain_closed_form, lower_bound_general, lower_bound_nonneg, GridCell, Prior,
    PriorKind, TrialPlan,
};

use crate::config::{ConfigError, ExperimentConfig};
use crate::table::{write_csv, CellBounds, CellSummary, OutputRow, Summary, VERSION};

/// Top-level command error, mapped to process exit codes by main.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: configuration or parameter problems.
    Config(String),
    /// Exit 3: an exact enumeration is too large.
    Capacity(String),
    /// Exit 1: I/O and serialization failures.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "error: {m}"),
            CliError::Capacity(m) => write!(f, "capacity error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<sparsedetect::Error> for CliError {
    fn from(e: sparsedetect::Error) -> Self {
        match e {
            sparsedetect::Error::Capacity(m) => CliError::Capacity(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Config(_) => 2,
        CliError::Capacity(_) => 3,
        CliError::Io(_) => 1,
    }
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Calibrated-threshold table produced by `calibrate` and consumed by
/// `simulate` through `detector.thresholds_file`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub version: String,
    pub entries: Vec<ThresholdEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub scheme: String,
    pub detector: String,
    pub n: usize,
    pub m: f64,
    pub alpha: f64,
    /// Raw null quantile of the statistic.
    pub threshold: f64,
    pub calibration_trials: u64,
    pub master_seed: u64,
}

fn scheme_params_string(config: &ExperimentConfig, m: f64) -> String {
    let mut parts = Vec::new();
    if config.scheme.kind == "bernoulli_block" {
        let h =
            config.scheme.h.unwrap_or_else(|| sparsedetect::default_block_count(m as usize));
        parts.push(format!("h={h}"));
    }
    if matches!(config.scheme.kind.as_str(), "bernoulli_block" | "fixed_bernoulli") {
        parts.push(format!("ensemble={}", config.scheme.ensemble));
        if let Some(seed) = config.scheme.ensemble_seed {
            parts.push(format!("ensemble_seed={seed}"));
        }
    }
    parts.join(";")
}

/// Resolve per-(n, m) thresholds: empirical calibration or a lookup in a
/// previously written table. Returns None when the detector's parameters
/// are fixed in the config.
fn resolve_thresholds(
    config: &ExperimentConfig,
    config_dir: &Path,
) -> Result<Option<BTreeMap<(usize, u64), f64>>, CliError> {
    if let Some(file) = &config.detector.thresholds_file {
        let alpha = config.detector.alpha.ok_or_else(|| {
            CliError::Config("detector.alpha: required to select thresholds from a file".into())
        })?;
        let path = config_dir.join(file);
        let text = std::fs::read_to_string(&path)?;
        let table: ThresholdTable = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("thresholds_file: {e}")))?;
        let mut resolved = BTreeMap::new();
        for &n in &config.grid.n {
            for &m in &config.grid.m {
                let entry = table
                    .entries
                    .iter()
                    .find(|e| {
                        e.scheme == config.scheme.kind
                            && e.detector == config.detector.kind
                            && e.n == n
                            && e.m == m
                            && e.alpha == alpha
                    })
                    .ok_or_else(|| {
                        CliError::Config(format!(
                            "thresholds_file: no entry for scheme={} detector={} n={n} m={m} alpha={alpha}",
                            config.scheme.kind, config.detector.kind
                        ))
                    })?;
                resolved.insert((n, m.to_bits()), entry.threshold);
            }
        }
        return Ok(Some(resolved));
    }
    if !config.needs_calibration() {
        return Ok(None);
    }
    let alpha = config.detector.alpha.expect("validated");
    let trials = config
        .detector
        .calibration_trials
        .unwrap_or_else(|| 20_000u64.max((100.0 / alpha).ceil() as u64));
    let scheme = config.scheme_spec()?;
    let ensemble = config.ensemble()?;
    let mut resolved = BTreeMap::new();
    for &n in &config.grid.n {
        for &m in &config.grid.m {
            let budget = config.budget_for(m);
            // Scan windows vary along the s axis; calibration is per (n, m,
            // s), folded into the key via the first grid s when unique.
            for &s in &config.grid.s {
                let statistic = config.statistic_spec(s)?;
                let threshold = sparsedetect::calibrate_threshold(
                    &scheme,
                    ensemble,
                    &budget,
                    &statistic,
                    n,
                    alpha,
                    &TrialPlan::new(trials, config.experiment.master_seed),
                )?;
                resolved.entry((n, m.to_bits())).or_insert(threshold);
                if config.detector.kind != "scan" {
                    break;
                }
            }
        }
    }
    Ok(Some(resolved))
}

fn build_rows(config: &ExperimentConfig, config_dir: &Path) -> Result<Vec<OutputRow>, CliError> {
    let scheme = config.scheme_spec()?;
    let ensemble = config.ensemble()?;
    let thresholds = resolve_thresholds(config, config_dir)?;

    // An unenumerable lrt prior dooms every cell; fail fast with exit 3.
    if config.detector.kind == "lrt" {
        for &n in &config.grid.n {
            for &s in &config.grid.s {
                for &mu in &config.grid.mu {
                    if let Some(prior) = config.prior_for(n, s, mu) {
                        prior.validate()?;
                        if !prior.is_enumerable() {
                            return Err(CliError::Capacity(format!(
                                "lrt prior at n={n} S={s} has {} atoms",
                                prior.support_size()
                            )));
                        }
                    }
                }
            }
        }
    }

    let mut cells = Vec::new();
    let mut meta = Vec::new();
    for &n in &config.grid.n {
        for &m in &config.grid.m {
            for &s in &config.grid.s {
                for &mu in &config.grid.mu {
                    let budget = config.budget_for(m);
                    let calibrated = thresholds.as_ref().map(|t| t[&(n, m.to_bits())]);
                    let detector = config.detector_spec(n, s, mu, calibrated, &budget)?;
                    let alternative = config.alternative_spec(n, s, mu);
                    cells.push(GridCell {
                        n,
                        m,
                        s,
                        mu,
                        budget,
                        scheme: scheme.clone(),
                        ensemble,
                        detector: detector.clone(),
                        alternative,
                    });
                    let bounds = cell_bounds(config, n, m, s, mu);
                    meta.push((detector, bounds));
                }
            }
        }
    }
    let plan = TrialPlan::new(config.experiment.trials, config.experiment.master_seed);
    let rows = sparsedetect::sweep(&cells, &plan);
    Ok(rows
        .into_iter()
        .zip(meta)
        .map(|(row, (detector, bounds))| OutputRow {
            n: row.cell.n,
            m: row.cell.m,
            m_is_count: config.experiment.budget == "count",
            s: row.cell.s,
            mu: row.cell.mu,
            scheme: config.scheme.kind.clone(),
            scheme_params: scheme_params_string(config, row.cell.m),
            detector: config.detector.kind.clone(),
            detector_params: detector.params_string(),
            budget_mode: if config.experiment.budget == "count" { "count" } else { "energy" },
            trials: plan.trials,
            seed: plan.master_seed,
            estimate: row.estimate,
            error: row.error,
            bounds,
        })
        .collect())
}

fn cell_bounds(
    config: &ExperimentConfig,
    n: usize,
    m: f64,
    s: usize,
    mu: f64,
) -> Option<CellBounds> {
    let prior = config.prior_for(n, s, mu)?;
    let report = kl_chain_closed_form(m, &prior).ok()?;
    let theorem = config.closed_form_lower_bound(n, m, s, mu)?;
    Some(CellBounds::new(prior.kind_name().to_string(), report, theorem))
}

fn write_summary(
    path: &Path,
    command: &'static str,
    config: &ExperimentConfig,
    rows: &[OutputRow],
    started_unix: u64,
    started: Instant,
) -> Result<(), CliError> {
    let summary = Summary {
        version: VERSION,
        command,
        config,
        config_toml: config.to_toml_string(),
        started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        cells: rows.iter().map(CellSummary::from_row).collect(),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

/// `simulate`: run the configured sweep, write the CSV and JSON summary.
pub fn cmd_simulate(
    config_path: &Path,
    overrides: &[(String, String)],
    csv_override: Option<PathBuf>,
    summary_override: Option<PathBuf>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let started_unix = now_unix();
    let config = ExperimentConfig::load(config_path, overrides)?;
    let config_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let rows = build_rows(&config, config_dir)?;
    let csv_path = csv_override
        .or_else(|| config.output.csv.as_ref().map(|p| config_dir.join(p)))
        .ok_or_else(|| CliError::Config("output.csv: no CSV output path given".into()))?;
    write_csv(&csv_path, &rows, false)?;
    let summary_path =
        summary_override.or_else(|| config.output.summary.as_ref().map(|p| config_dir.join(p)));
    if let Some(path) = summary_path {
        write_summary(&path, "simulate", &config, &rows, started_unix, started)?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "simulate: {} cells ({failed} failed) -> {}",
        rows.len(),
        csv_path.display()
    );
    Ok(())
}

/// `calibrate`: write a threshold table for the configured statistic.
pub fn cmd_calibrate(
    config_path: &Path,
    overrides: &[(String, String)],
    out_override: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path, overrides)?;
    let config_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let alphas: Vec<f64> = match config.detector.alpha {
        Some(a) => vec![a],
        None => {
            return Err(CliError::Config(
                "detector.alpha: calibrate needs an alpha".into(),
            ))
        }
    };
    let scheme = config.scheme_spec()?;
    let ensemble = config.ensemble()?;
    let mut entries = Vec::new();
    for &n in &config.grid.n {
        for &m in &config.grid.m {
            let budget = config.budget_for(m);
            for &alpha in &alphas {
                let trials = config
                    .detector
                    .calibration_trials
                    .unwrap_or_else(|| 20_000u64.max((100.0 / alpha).ceil() as u64));
                let statistic = config.statistic_spec(config.grid.s[0])?;
                let threshold = sparsedetect::calibrate_threshold(
                    &scheme,
                    ensemble,
                    &budget,
                    &statistic,
                    n,
                    alpha,
                    &TrialPlan::new(trials, config.experiment.master_seed),
                )?;
                entries.push(ThresholdEntry {
                    scheme: config.scheme.kind.clone(),
                    detector: config.detector.kind.clone(),
                    n,
                    m,
                    alpha,
                    threshold,
                    calibration_trials: trials,
                    master_seed: config.experiment.master_seed,
                });
            }
        }
    }
    let table = ThresholdTable { version: VERSION.to_string(), entries };
    let json =
        serde_json::to_string_pretty(&table).map_err(|e| CliError::Io(e.to_string()))?;
    let out = out_override
        .or_else(|| config.output.summary.as_ref().map(|p| config_dir.join(p)))
        .ok_or_else(|| CliError::Config("--out: calibrate needs an output path".into()))?;
    std::fs::write(&out, json + "\n")?;
    eprintln!("calibrate: {} entries -> {}", table.entries.len(), out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct BoundsOutput {
    prior: String,
    n: usize,
    m: f64,
    s: usize,
    mu: f64,
    kl_upper: f64,
    tv_upper: f64,
    risk_lower: f64,
    theorem_lower_bound: f64,
}

/// `bounds`: print the closed-form bound chain for one instance as JSON.
pub fn cmd_bounds(prior_kind: &str, n: usize, m: f64, s: usize, mu: f64) -> Result<(), CliError> {
    let kind = match prior_kind {
        "nonneg" => PriorKind::NonnegUniform,
        "signed" => PriorKind::SignedUniform,
        "interval" => PriorKind::IntervalUniform,
        other => {
            return Err(CliError::Config(format!(
                "prior: unknown prior \"{other}\" (nonneg, signed, interval)"
            )))
        }
    };
    let prior = Prior::new(kind, n, s, mu);
    prior.validate()?;
    if !(m > 0.0) {
        return Err(CliError::Config(format!("m: budget {m} must be positive")));
    }
    let report = kl_chain_closed_form(m, &prior)?;
    let theorem = match kind {
        PriorKind::NonnegUniform | PriorKind::IntervalUniform => lower_bound_nonneg(n, m, s, mu),
        PriorKind::SignedUniform => lower_bound_general(n, m, s, mu),
    };
    let out = BoundsOutput {
        prior: prior.kind_name().to_string(),
        n,
        m,
        s,
        mu,
        kl_upper: report.kl_upper,
        tv_upper: report.tv_upper,
        risk_lower: report.risk_lower,
        theorem_lower_bound: theorem,
    };
    let json = serde_json::to_string_pretty(&out).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{json}");
    Ok(())
}

/// Parameters of the `phase` preset.
pub struct PhaseArgs {
    pub kind: String,
    pub n: usize,
    pub m: f64,
    pub s: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub points: usize,
    pub trials: u64,
    pub seed: u64,
    pub alpha: f64,
    pub h: Option<usize>,
    pub csv: PathBuf,
    pub summary: Option<PathBuf>,
}

/// `phase`: a simulate preset sweeping mu on a log grid, with the relevant
/// detector and the bound columns side by side in the CSV.
pub fn cmd_phase(args: &PhaseArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let started_unix = now_unix();
    if args.points < 2 || !(args.mu_min > 0.0) || !(args.mu_max > args.mu_min) {
        return Err(CliError::Config(
            "mu grid: need points >= 2 and 0 < mu-min < mu-max".into(),
        ));
    }
    let ratio = args.mu_max / args.mu_min;
    let mus: Vec<f64> = (0..args.points)
        .map(|k| args.mu_min * ratio.powf(k as f64 / (args.points - 1) as f64))
        .collect();
    let (scheme_kind, detector_kind, alternative_kind) = match args.kind.as_str() {
        "nonneg" => ("constant", "sum", "nonneg_sparse"),
        "general" => ("bernoulli_block", "block_energy", "signed_sparse"),
        other => {
            return Err(CliError::Config(format!(
                "kind: unknown phase kind \"{other}\" (nonneg, general)"
            )))
        }
    };
    let config = ExperimentConfig {
        experiment: crate::config::ExperimentSection {
            name: format!("phase-{}", args.kind),
            trials: args.trials,
            master_seed: args.seed,
            budget: "count".into(),
        },
        grid: crate::config::GridSection {
            n: vec![args.n],
            m: vec![args.m],
            s: vec![args.s],
            mu: mus,
        },
        scheme: crate::config::SchemeSection {
            kind: scheme_kind.into(),
            h: args.h,
            ensemble: "redraw".into(),
            ensemble_seed: None,
        },
        detector: crate::config::DetectorSection {
            kind: detector_kind.into(),
            tau: (args.kind == "nonneg").then(|| default_tau(args.alpha)),
            tau_m: None,
            threshold: None,
            calibrate: args.kind == "general",
            alpha: Some(args.alpha),
            calibration_trials: None,
            thresholds_file: None,
            circular: true,
        },
        alternative: crate::config::AlternativeSection {
            kind: alternative_kind.into(),
            values: None,
        },
        output: Default::default(),
    };
    config.validate()?;
    let rows = build_rows(&config, Path::new("."))?;
    write_csv(&args.csv, &rows, true)?;
    if let Some(path) = &args.summary {
        write_summary(path, "phase", &config, &rows, started_unix, started)?;
    }
    eprintln!("phase: {} cells -> {}", rows.len(), args.csv.display());
    Ok(())
}
