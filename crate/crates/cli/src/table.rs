//! The fixed output-table schema shared by simulate and phase, and the JSON
//! summary structures.

use serde::{Deserialize, Serialize};
use sparsedetect::{BoundReport, RiskEstimate};

use crate::config::ExperimentConfig;
use crate::csvfmt::{fmt_g6, fmt_opt};

/// The documented CSV schema, in column order.
pub const CSV_HEADER: [&str; 16] = [
    "n",
    "m",
    "S",
    "mu",
    "scheme",
    "scheme_params",
    "detector",
    "detector_params",
    "budget_mode",
    "trials",
    "seed",
    "type1",
    "type2",
    "risk",
    "ci_half_width",
    "error",
];

/// Extra columns appended by the phase subcommand.
pub const PHASE_BOUND_COLUMNS: [&str; 3] = ["risk_lower", "kl_upper", "tv_upper"];

/// One fully rendered output row.
#[derive(Debug, Clone)]
pub struct OutputRow {
    pub n: usize,
    pub m: f64,
    pub m_is_count: bool,
    pub s: usize,
    pub mu: f64,
    pub scheme: String,
    pub scheme_params: String,
    pub detector: String,
    pub detector_params: String,
    pub budget_mode: &'static str,
    pub trials: u64,
    pub seed: u64,
    pub estimate: Option<RiskEstimate>,
    pub error: Option<String>,
    pub bounds: Option<CellBounds>,
}

/// Bound values attached to a cell (JSON summary and phase CSV).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellBounds {
    pub prior: String,
    pub kl_upper: f64,
    pub tv_upper: f64,
    pub risk_lower: f64,
    /// The closed-form theorem bound for the class (equals `risk_lower`
    /// for the structured priors).
    pub theorem_lower_bound: f64,
}

impl CellBounds {
    pub fn new(prior: String, report: BoundReport, theorem_lower_bound: f64) -> Self {
        CellBounds {
            prior,
            kl_upper: report.kl_upper,
            tv_upper: report.tv_upper,
            risk_lower: report.risk_lower,
            theorem_lower_bound,
        }
    }
}

impl OutputRow {
    pub fn csv_record(&self, with_bounds: bool) -> Vec<String> {
        let m_field = if self.m_is_count {
            format!("{}", self.m as u64)
        } else {
            fmt_g6(self.m)
        };
        let mut record = vec![
            self.n.to_string(),
            m_field,
            self.s.to_string(),
            fmt_g6(self.mu),
            self.scheme.clone(),
            self.scheme_params.clone(),
            self.detector.clone(),
            self.detector_params.clone(),
            self.budget_mode.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
            fmt_opt(self.estimate.map(|e| e.type1)),
            fmt_opt(self.estimate.map(|e| e.type2)),
            fmt_opt(self.estimate.map(|e| e.risk)),
            fmt_opt(self.estimate.map(|e| e.ci_half_width)),
            self.error.clone().unwrap_or_default(),
        ];
        if with_bounds {
            record.push(fmt_opt(self.bounds.as_ref().map(|b| b.risk_lower)));
            record.push(fmt_opt(self.bounds.as_ref().map(|b| b.kl_upper)));
            record.push(fmt_opt(self.bounds.as_ref().map(|b| b.tv_upper)));
        }
        record
    }
}

/// Write rows to a CSV file with the fixed schema.
pub fn write_csv(
    path: &std::path::Path,
    rows: &[OutputRow],
    with_bounds: bool,
) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_bounds {
        header.extend(PHASE_BOUND_COLUMNS);
    }
    writer.write_record(&header)?;
    for row in rows {
        writer.write_record(row.csv_record(with_bounds))?;
    }
    writer.flush()
}

/// Per-cell entry of the JSON summary.
#[derive(Debug, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub m: f64,
    pub s: usize,
    pub mu: f64,
    pub scheme: String,
    pub scheme_params: String,
    pub detector: String,
    pub detector_params: String,
    pub budget_mode: String,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub type1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub type2: Option<f64>,
    /// Labeled honestly: class alternatives average over the class prior.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayes_risk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<CellBounds>,
}

impl CellSummary {
    pub fn from_row(row: &OutputRow) -> Self {
        CellSummary {
            n: row.n,
            m: row.m,
            s: row.s,
            mu: row.mu,
            scheme: row.scheme.clone(),
            scheme_params: row.scheme_params.clone(),
            detector: row.detector.clone(),
            detector_params: row.detector_params.clone(),
            budget_mode: row.budget_mode.to_string(),
            trials: row.trials,
            seed: row.seed,
            type1: row.estimate.map(|e| e.type1),
            type2: row.estimate.map(|e| e.type2),
            bayes_risk: row.estimate.map(|e| e.risk),
            ci_half_width: row.estimate.map(|e| e.ci_half_width),
            error: row.error.clone(),
            bounds: row.bounds.clone(),
        }
    }
}

/// The JSON summary written next to each CSV.
#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    /// The resolved config as TOML; rerunning from this text reproduces the
    /// CSV byte-identically.
    pub config_toml: String,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub cells: Vec<CellSummary>,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
