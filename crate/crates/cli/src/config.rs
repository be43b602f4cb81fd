//! Experiment configuration: a TOML file with nested sections, plus
//! `--set key=value` overrides applied before deserialization (flags win).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sparsedetect::{
    Budget, DetectorSpec, EnsembleMode, Prior, PriorKind, SchemeSpec, SignalSpec,
};

/// Error carrying the offending key, mapped to exit code 2 by main.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, detail: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{key}: {detail}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub grid: GridSection,
    pub scheme: SchemeSection,
    pub detector: DetectorSection,
    pub alternative: AlternativeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub name: String,
    pub trials: u64,
    /// Seeds are always explicit; there is no implicit time-based seeding.
    pub master_seed: u64,
    /// "count" or "energy".
    #[serde(default = "default_budget_mode")]
    pub budget: String,
}

fn default_budget_mode() -> String {
    "count".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSection {
    pub n: Vec<usize>,
    pub m: Vec<f64>,
    pub s: Vec<usize>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    #[serde(default = "default_ensemble")]
    pub ensemble: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble_seed: Option<u64>,
}

fn default_ensemble() -> String {
    "redraw".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Calibrate the threshold empirically at `alpha` instead of fixing it.
    #[serde(default)]
    pub calibrate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_trials: Option<u64>,
    /// Reuse thresholds from a calibrate-command table instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds_file: Option<String>,
    /// Scan window wrap-around; defaults to circular.
    #[serde(default = "default_circular")]
    pub circular: bool,
}

fn default_circular() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlternativeSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

impl ExperimentConfig {
    /// Load a config file, apply dotted-path overrides, validate.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(&path.display().to_string(), e))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut value: toml::Value =
            text.parse().map_err(|e| ConfigError(format!("invalid TOML: {e}")))?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let config: ExperimentConfig =
            value.try_into().map_err(|e| ConfigError(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.experiment.trials < 1_000 {
            return Err(bad("experiment.trials", "must be at least 1000"));
        }
        if !matches!(self.experiment.budget.as_str(), "count" | "energy") {
            return Err(bad("experiment.budget", "must be \"count\" or \"energy\""));
        }
        for (key, empty) in [
            ("grid.n", self.grid.n.is_empty()),
            ("grid.m", self.grid.m.is_empty()),
            ("grid.s", self.grid.s.is_empty()),
            ("grid.mu", self.grid.mu.is_empty()),
        ] {
            if empty {
                return Err(bad(key, "axis must be nonempty"));
            }
        }
        if self.experiment.budget == "count" {
            for &m in &self.grid.m {
                if m.fract() != 0.0 || m < 0.0 {
                    return Err(bad("grid.m", format!("count budgets need integer m, got {m}")));
                }
            }
        }
        self.scheme_spec()?;
        let _ = self.ensemble()?;
        self.alternative_kind()?;
        match self.detector.kind.as_str() {
            "sum" | "block_energy" | "energy" | "max_correlation" | "lrt" | "scan" => {}
            other => return Err(bad("detector.kind", format!("unknown detector \"{other}\""))),
        }
        if self.detector.calibrate && self.detector.alpha.is_none() {
            return Err(bad("detector.alpha", "calibrate = true requires alpha"));
        }
        if let Some(alpha) = self.detector.alpha {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(bad("detector.alpha", "must lie strictly between 0 and 1"));
            }
        }
        if self.alternative.kind == "explicit" {
            let values = self
                .alternative
                .values
                .as_ref()
                .ok_or_else(|| bad("alternative.values", "explicit alternative requires values"))?;
            if self.grid.n.len() != 1 || values.len() != self.grid.n[0] {
                return Err(bad(
                    "alternative.values",
                    "explicit values require a single n axis entry matching their length",
                ));
            }
            if self.detector.kind == "lrt" {
                return Err(bad("detector.kind", "lrt needs a class alternative, not explicit"));
            }
        }
        Ok(())
    }

    pub fn budget_for(&self, m: f64) -> Budget {
        if self.experiment.budget == "count" {
            Budget::count(m as u64)
        } else {
            Budget::energy(m)
        }
    }

    pub fn scheme_spec(&self) -> Result<SchemeSpec, ConfigError> {
        match self.scheme.kind.as_str() {
            "constant" => Ok(SchemeSpec::Constant),
            "bernoulli_block" => Ok(SchemeSpec::BernoulliBlock { h: self.scheme.h }),
            "fixed_bernoulli" => Ok(SchemeSpec::FixedBernoulli),
            "energy_constant" => Ok(SchemeSpec::EnergyConstant),
            "coordinate" => Ok(SchemeSpec::Coordinate),
            other => Err(bad("scheme.kind", format!("unknown scheme \"{other}\""))),
        }
    }

    pub fn ensemble(&self) -> Result<EnsembleMode, ConfigError> {
        match self.scheme.ensemble.as_str() {
            "redraw" => Ok(EnsembleMode::Redraw),
            "fixed_seed" => Ok(EnsembleMode::FixedSeed(self.scheme.ensemble_seed.ok_or_else(
                || bad("scheme.ensemble_seed", "fixed_seed ensembles need a seed"),
            )?)),
            other => Err(bad("scheme.ensemble", format!("unknown ensemble mode \"{other}\""))),
        }
    }

    fn alternative_kind(&self) -> Result<(), ConfigError> {
        match self.alternative.kind.as_str() {
            "nonneg_sparse" | "signed_sparse" | "interval" | "interval_signed" | "explicit" => {
                Ok(())
            }
            other => Err(bad("alternative.kind", format!("unknown alternative \"{other}\""))),
        }
    }

    pub fn alternative_spec(&self, n: usize, s: usize, mu: f64) -> SignalSpec {
        match self.alternative.kind.as_str() {
            "nonneg_sparse" => SignalSpec::nonneg_sparse(n, s, mu),
            "signed_sparse" => SignalSpec::signed_sparse(n, s, mu),
            "interval" => SignalSpec::interval(n, s, mu),
            "interval_signed" => SignalSpec::interval_signed(n, s, mu),
            "explicit" => SignalSpec::explicit(self.alternative.values.clone().unwrap_or_default()),
            _ => unreachable!("validated"),
        }
    }

    /// The prior matching the alternative class, used for bound columns and
    /// the lrt detector. Explicit alternatives have none.
    pub fn prior_for(&self, n: usize, s: usize, mu: f64) -> Option<Prior> {
        let kind = match self.alternative.kind.as_str() {
            "nonneg_sparse" => PriorKind::NonnegUniform,
            "signed_sparse" => PriorKind::SignedUniform,
            "interval" | "interval_signed" => PriorKind::IntervalUniform,
            _ => return None,
        };
        Some(Prior::new(kind, n, s, mu))
    }

    /// Closed-form theorem lower bound for the alternative class.
    pub fn closed_form_lower_bound(&self, n: usize, m: f64, s: usize, mu: f64) -> Option<f64> {
        match self.alternative.kind.as_str() {
            "nonneg_sparse" | "interval" => Some(sparsedetect::lower_bound_nonneg(n, m, s, mu)),
            "signed_sparse" | "interval_signed" => {
                Some(sparsedetect::lower_bound_general(n, m, s, mu))
            }
            _ => None,
        }
    }

    /// Build the detector for one grid cell, given an already-resolved
    /// threshold (None means the detector's own fixed parameters apply).
    pub fn detector_spec(
        &self,
        n: usize,
        s: usize,
        mu: f64,
        calibrated: Option<f64>,
        budget: &Budget,
    ) -> Result<DetectorSpec, ConfigError> {
        let fixed = |value: Option<f64>, key: &str| -> Result<f64, ConfigError> {
            value.ok_or_else(|| bad(key, "detector parameter required unless calibrate = true"))
        };
        match self.detector.kind.as_str() {
            "sum" => {
                let tau = match calibrated {
                    Some(t) => t,
                    None => fixed(self.detector.tau, "detector.tau")?,
                };
                Ok(DetectorSpec::Sum { tau })
            }
            "block_energy" => {
                let tau_m = match calibrated {
                    // The calibrated value is the raw statistic quantile;
                    // convert back through m (1 + tau_m / sqrt(h)).
                    Some(raw) => {
                        let m = budget.size();
                        let h = self
                            .scheme
                            .h
                            .unwrap_or_else(|| sparsedetect::default_block_count(m as usize));
                        (raw / m - 1.0) * (h as f64).sqrt()
                    }
                    None => fixed(self.detector.tau_m, "detector.tau_m")?,
                };
                Ok(DetectorSpec::BlockEnergy { tau_m })
            }
            "energy" => Ok(DetectorSpec::FixedEnergy {
                threshold: match calibrated {
                    Some(t) => t,
                    None => fixed(self.detector.threshold, "detector.threshold")?,
                },
            }),
            "max_correlation" => Ok(DetectorSpec::MaxCorrelation {
                threshold: match calibrated {
                    Some(t) => t,
                    None => fixed(self.detector.threshold, "detector.threshold")?,
                },
            }),
            "lrt" => {
                let prior = self
                    .prior_for(n, s, mu)
                    .ok_or_else(|| bad("detector.kind", "lrt needs a class alternative"))?;
                Ok(DetectorSpec::Lrt { prior })
            }
            "scan" => Ok(DetectorSpec::Scan {
                s,
                threshold: match calibrated {
                    Some(t) => t,
                    None => fixed(self.detector.threshold, "detector.threshold")?,
                },
                circular: self.detector.circular,
            }),
            _ => unreachable!("validated"),
        }
    }

    /// True when the detector's threshold comes from calibration.
    pub fn needs_calibration(&self) -> bool {
        self.detector.calibrate
    }

    /// The statistic whose null quantile calibration measures (thresholds
    /// are placeholders).
    pub fn statistic_spec(&self, s: usize) -> Result<DetectorSpec, ConfigError> {
        match self.detector.kind.as_str() {
            "sum" => Ok(DetectorSpec::Sum { tau: f64::INFINITY }),
            "block_energy" => Ok(DetectorSpec::BlockEnergy { tau_m: f64::INFINITY }),
            "energy" => Ok(DetectorSpec::FixedEnergy { threshold: f64::INFINITY }),
            "max_correlation" => Ok(DetectorSpec::MaxCorrelation { threshold: f64::INFINITY }),
            "scan" => Ok(DetectorSpec::Scan {
                s,
                threshold: f64::INFINITY,
                circular: self.detector.circular,
            }),
            "lrt" => Err(bad("detector.kind", "the lrt threshold is fixed at 1, not calibrated")),
            _ => unreachable!("validated"),
        }
    }
}

fn apply_override(value: &mut toml::Value, key: &str, raw: &str) -> Result<(), ConfigError> {
    let mut node = value;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.is_empty() {
        return Err(ConfigError(format!("empty override key \"{key}\"")));
    }
    for part in &parts[..parts.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| bad(key, "path traverses a non-table"))?
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    let leaf = parts.last().unwrap();
    let parsed: toml::Value = if let Ok(i) = raw.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = raw.parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = raw.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(raw.to_string())
    };
    node.as_table_mut()
        .ok_or_else(|| bad(key, "path traverses a non-table"))?
        .insert(leaf.to_string(), parsed);
    Ok(())
}
