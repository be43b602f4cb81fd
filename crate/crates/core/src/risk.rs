//! Monte Carlo machinery: risk estimation, threshold calibration, and
//! reproducible parallel trial execution.
//!
//! Determinism contract: every trial draws from its own counter-derived
//! stream and aggregation is exact integer counting, so results are
//! identical for any worker count and scheduling, including one worker.

use rand::RngCore;
use rayon::prelude::*;

use crate::detectors::DetectorSpec;
use crate::error::{Error, Result};
use crate::model::{classic_observations, realize_signal, run_session, Budget, SignalKind, SignalSpec};
use crate::rng::{trial_rng, Arm};
use crate::schemes::{EnsembleMode, SchemeSpec};
use crate::stats::{binomial_se, quantile_higher};

/// How many trials to run and which master seed derives their streams.
///
/// Per-trial substreams are a deterministic function of
/// `(master_seed, trial index, arm)`; distinct pairs never share stream
/// state, so execution order and parallelism cannot affect results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TrialPlan {
    pub trials: u64,
    pub master_seed: u64,
}

impl TrialPlan {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        TrialPlan { trials, master_seed }
    }
}

/// Estimated detection risk of one (scheme, detector, alternative) cell.
///
/// The alternative leg draws a fresh signal per trial for class
/// alternatives, so `risk` is a Bayes risk under the class's uniform prior;
/// for explicit signals it is the risk against that fixed vector.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RiskEstimate {
    /// Estimated type-I error (null rejections / trials).
    pub type1: f64,
    /// Estimated type-II error (alternative non-rejections / trials).
    pub type2: f64,
    /// `type1 + type2`, in [0, 2].
    pub risk: f64,
    /// 95% half-width, binomial per component, combined in quadrature.
    pub ci_half_width: f64,
    pub trials: u64,
    pub master_seed: u64,
}

fn trial_seed_for(ensemble: EnsembleMode, drawn: u64) -> u64 {
    match ensemble {
        EnsembleMode::Redraw => drawn,
        EnsembleMode::FixedSeed(s) => s,
    }
}

/// Run one arm of a cell and count rejections per detector.
fn arm_reject_counts(
    scheme: &SchemeSpec,
    ensemble: EnsembleMode,
    budget: &Budget,
    detectors: &[DetectorSpec],
    alternative: Option<&SignalSpec>,
    n: usize,
    plan: &TrialPlan,
    arm: Arm,
) -> Result<Vec<u64>> {
    let zero = vec![0.0; n];
    // Coordinate sessions feeding only scan detectors skip transcript
    // materialization; the rescaled responses are the classical
    // per-coordinate observations.
    let scan_only = matches!(scheme, SchemeSpec::Coordinate)
        && detectors.iter().all(|d| matches!(d, DetectorSpec::Scan { .. }));
    (0..plan.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<u64>> {
            let mut rng = trial_rng(plan.master_seed, trial, arm);
            // Fixed intra-trial draw order: scheme seed, signal, noise.
            let scheme_seed = trial_seed_for(ensemble, rng.next_u64());
            let x = match alternative {
                None => zero.clone(),
                Some(spec) => realize_signal(spec, &mut rng)?,
            };
            let mut counts = vec![0u64; detectors.len()];
            if scan_only {
                let y = classic_observations(&x, budget.size(), &mut rng)?;
                for (c, d) in counts.iter_mut().zip(detectors) {
                    let DetectorSpec::Scan { s, threshold, circular } = d else {
                        unreachable!()
                    };
                    let out = crate::detectors::scan_test(&y, *s, *threshold, *circular)?;
                    *c = u64::from(out.reject);
                }
            } else {
                let strategy = scheme.instantiate(n, budget, scheme_seed)?;
                let transcript = run_session(&strategy, &x, budget, &mut rng)?;
                for (c, d) in counts.iter_mut().zip(detectors) {
                    *c = u64::from(d.evaluate(&transcript, &strategy)?.reject);
                }
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; detectors.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )
}

fn alternative_dimension(alternative: &SignalSpec) -> Result<usize> {
    alternative.validate()?;
    if matches!(alternative.kind, SignalKind::Zero) {
        return Err(Error::parameter(
            "the alternative signal must not be the null; use estimate_risk's null arm",
        ));
    }
    Ok(alternative.n)
}

/// Estimate type-I and type-II errors of several detectors on shared
/// transcripts: the null arm uses `x = 0`, the alternative arm draws `x`
/// fresh per trial (class kinds) or fixes it (explicit kind). Thresholds
/// must be fixed before trials; nothing here adapts them.
pub fn estimate_risk_multi(
    scheme: &SchemeSpec,
    ensemble: EnsembleMode,
    budget: &Budget,
    detectors: &[DetectorSpec],
    alternative: &SignalSpec,
    plan: &TrialPlan,
) -> Result<Vec<RiskEstimate>> {
    if plan.trials == 0 {
        return Err(Error::parameter("risk estimation requires at least one trial"));
    }
    if detectors.is_empty() {
        return Err(Error::parameter("risk estimation requires at least one detector"));
    }
    let n = alternative_dimension(alternative)?;
    let rejects_null =
        arm_reject_counts(scheme, ensemble, budget, detectors, None, n, plan, Arm::Null)?;
    let rejects_alt = arm_reject_counts(
        scheme,
        ensemble,
        budget,
        detectors,
        Some(alternative),
        n,
        plan,
        Arm::Alternative,
    )?;
    let t = plan.trials;
    Ok(rejects_null
        .into_iter()
        .zip(rejects_alt)
        .map(|(k1, k2_reject)| {
            let misses = t - k2_reject;
            let type1 = k1 as f64 / t as f64;
            let type2 = misses as f64 / t as f64;
            let se1 = binomial_se(k1, t);
            let se2 = binomial_se(misses, t);
            RiskEstimate {
                type1,
                type2,
                risk: type1 + type2,
                ci_half_width: 1.96 * (se1 * se1 + se2 * se2).sqrt(),
                trials: t,
                master_seed: plan.master_seed,
            }
        })
        .collect())
}

/// Single-detector risk estimate; see [`estimate_risk_multi`].
pub fn estimate_risk(
    scheme: &SchemeSpec,
    ensemble: EnsembleMode,
    budget: &Budget,
    detector: &DetectorSpec,
    alternative: &SignalSpec,
    plan: &TrialPlan,
) -> Result<RiskEstimate> {
    Ok(estimate_risk_multi(scheme, ensemble, budget, std::slice::from_ref(detector), alternative, plan)?
        .remove(0))
}

/// Empirical (1 - alpha)-quantile of a statistic under the null with the
/// given scheme in ambient dimension `n`, using the higher order statistic
/// so the realized level does not exceed alpha in expectation. Calibration
/// trials draw from streams disjoint from the estimation arms.
pub fn calibrate_threshold(
    scheme: &SchemeSpec,
    ensemble: EnsembleMode,
    budget: &Budget,
    statistic: &DetectorSpec,
    n: usize,
    alpha: f64,
    plan: &TrialPlan,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::parameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if (plan.trials as f64) < 100.0 / alpha {
        return Err(Error::parameter(format!(
            "{} trials are insufficient for alpha = {alpha}; need at least {}",
            plan.trials,
            (100.0 / alpha).ceil()
        )));
    }
    let zero = vec![0.0; n];
    let scan_only = matches!(scheme, SchemeSpec::Coordinate)
        && matches!(statistic, DetectorSpec::Scan { .. });
    let mut stats: Vec<f64> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut rng = trial_rng(plan.master_seed, trial, Arm::Calibration);
            let scheme_seed = trial_seed_for(ensemble, rng.next_u64());
            if scan_only {
                let y = classic_observations(&zero, budget.size(), &mut rng)?;
                let DetectorSpec::Scan { s, circular, .. } = statistic else { unreachable!() };
                Ok(crate::detectors::scan_test(&y, *s, f64::INFINITY, *circular)?.statistic)
            } else {
                let strategy = scheme.instantiate(n, budget, scheme_seed)?;
                let transcript = run_session(&strategy, &zero, budget, &mut rng)?;
                Ok(statistic.evaluate(&transcript, &strategy)?.statistic)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    Ok(quantile_higher(&stats, 1.0 - alpha))
}

/// One cell of an experiment grid.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub n: usize,
    /// Budget size: the measurement count or the energy.
    pub m: f64,
    pub s: usize,
    pub mu: f64,
    pub budget: Budget,
    pub scheme: SchemeSpec,
    pub ensemble: EnsembleMode,
    pub detector: DetectorSpec,
    pub alternative: SignalSpec,
}

/// One row of a sweep: the cell plus its estimate, or the error that
/// prevented it.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub cell: GridCell,
    pub estimate: Option<RiskEstimate>,
    pub error: Option<String>,
}

/// Evaluate every grid cell with the same trial plan. Individual cell
/// failures are recorded per row and do not abort the sweep. Rows come back
/// in grid order; the whole sweep is deterministic given the plan.
pub fn sweep(cells: &[GridCell], plan: &TrialPlan) -> Vec<SweepRow> {
    cells
        .iter()
        .map(|cell| {
            match estimate_risk(
                &cell.scheme,
                cell.ensemble,
                &cell.budget,
                &cell.detector,
                &cell.alternative,
                plan,
            ) {
                Ok(estimate) => {
                    SweepRow { cell: cell.clone(), estimate: Some(estimate), error: None }
                }
                Err(e) => SweepRow { cell: cell.clone(), estimate: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}
