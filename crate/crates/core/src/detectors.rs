//! Test statistics and decision rules, plus the exact likelihood-ratio
//! oracle used to certify information bounds on small instances.
//!
//! Every decision uses strict inequality `statistic > threshold`; ties favor
//! the null (tie probability is zero under the continuous model).

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{SignalSpec, Transcript};
use crate::schemes::{BlockPlan, Descriptor, Scheme};
use crate::stats::{normal_cdf, normal_quantile};

/// Largest prior support that [`exact_lrt`] will enumerate.
pub const ENUMERATION_CAPACITY: u128 = 1_000_000;

/// Statistic value, threshold used, and the binary decision.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
    pub detector: Descriptor,
}

impl TestOutcome {
    fn new(statistic: f64, threshold: f64, detector: Descriptor) -> Self {
        TestOutcome { statistic, threshold, reject: statistic > threshold, detector }
    }
}

/// The enumerable priors the lower-bound machinery puts on the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// Uniform over supports of size S, entries all mu.
    NonnegUniform,
    /// Uniform over supports of size S and independent signs, entries +-mu.
    SignedUniform,
    /// Uniform over circular intervals of length S, entries all mu.
    IntervalUniform,
}

/// A finite-support prior over the alternative class.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Prior {
    pub kind: PriorKind,
    pub n: usize,
    pub s: usize,
    pub mu: f64,
}

impl Prior {
    pub fn new(kind: PriorKind, n: usize, s: usize, mu: f64) -> Self {
        Prior { kind, n, s, mu }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::parameter("prior dimension n must be positive"));
        }
        if self.s == 0 || self.s > self.n {
            return Err(Error::parameter(format!(
                "prior support size S = {} must satisfy 1 <= S <= n = {}",
                self.s, self.n
            )));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::parameter(format!("prior amplitude {} must be nonnegative", self.mu)));
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PriorKind::NonnegUniform => "nonneg",
            PriorKind::SignedUniform => "signed",
            PriorKind::IntervalUniform => "interval",
        }
    }

    /// Number of atoms in the prior's support; saturates on overflow.
    pub fn support_size(&self) -> u128 {
        match self.kind {
            PriorKind::NonnegUniform => binomial(self.n, self.s),
            PriorKind::SignedUniform => {
                let combos = binomial(self.n, self.s);
                if self.s >= 128 {
                    return u128::MAX;
                }
                combos.saturating_mul(1u128 << self.s)
            }
            PriorKind::IntervalUniform => self.n as u128,
        }
    }

    pub fn is_enumerable(&self) -> bool {
        self.support_size() <= ENUMERATION_CAPACITY
    }

    /// The signal class this prior is the uniform distribution over.
    pub fn signal_spec(&self) -> SignalSpec {
        match self.kind {
            PriorKind::NonnegUniform => SignalSpec::nonneg_sparse(self.n, self.s, self.mu),
            PriorKind::SignedUniform => SignalSpec::signed_sparse(self.n, self.s, self.mu),
            PriorKind::IntervalUniform => SignalSpec::interval(self.n, self.s, self.mu),
        }
    }

    /// Draw one atom from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        crate::model::realize_signal(&self.signal_spec(), rng)
    }

    /// Visit every atom of the support as sparse (index, value) pairs.
    /// Atoms are visited in a fixed deterministic order.
    pub fn for_each_atom(&self, mut f: impl FnMut(&[(usize, f64)])) {
        let s = self.s;
        let mut atom: Vec<(usize, f64)> = vec![(0, 0.0); s];
        match self.kind {
            PriorKind::NonnegUniform => {
                for_each_combination(self.n, s, |support| {
                    for (slot, &j) in atom.iter_mut().zip(support) {
                        *slot = (j, self.mu);
                    }
                    f(&atom);
                });
            }
            PriorKind::SignedUniform => {
                for_each_combination(self.n, s, |support| {
                    for mask in 0u64..(1u64 << s) {
                        for (k, (slot, &j)) in atom.iter_mut().zip(support).enumerate() {
                            let sign = if mask >> k & 1 == 1 { -1.0 } else { 1.0 };
                            *slot = (j, sign * self.mu);
                        }
                        f(&atom);
                    }
                });
            }
            PriorKind::IntervalUniform => {
                for start in 0..self.n {
                    for (k, slot) in atom.iter_mut().enumerate() {
                        *slot = ((start + k) % self.n, self.mu);
                    }
                    f(&atom);
                }
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic enumeration of all size-k subsets of {0, ..., n-1}.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    debug_assert!(k >= 1 && k <= n);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Default critical value for a level-`alpha` one-sided normal test.
pub fn default_tau(alpha: f64) -> f64 {
    normal_quantile(1.0 - alpha)
}

/// Slowly diverging critical sequence for asymptotic demonstrations.
pub fn theory_tau_m(m: usize) -> f64 {
    (2.0 * (m as f64).ln().ln()).max(0.0).sqrt()
}

/// Sum test: normalized statistic `sum(y_i) / sqrt(m)`, rejecting above tau.
pub fn sum_test(t: &Transcript, tau: f64) -> Result<TestOutcome> {
    if t.is_empty() {
        return Err(Error::parameter("sum test requires a nonempty transcript"));
    }
    let m = t.len() as f64;
    let statistic = t.responses().sum::<f64>() / m.sqrt();
    Ok(TestOutcome::new(statistic, tau, Descriptor::new("sum").with("tau", tau)))
}

/// Closed-form risk of the sum test under the constant scheme against a
/// nonnegative vector with the given l1 norm:
/// `1 - Phi(tau) + Phi(tau - sqrt(m/n) |x|)`.
pub fn sum_test_risk(n: usize, m: f64, l1_norm: f64, tau: f64) -> f64 {
    let shift = (m / n as f64).sqrt() * l1_norm;
    1.0 - normal_cdf(tau) + normal_cdf(tau - shift)
}

/// Threshold of the block-energy test: `m (1 + tau_m / sqrt(h))`.
pub fn block_energy_threshold(m: usize, h: usize, tau_m: f64) -> f64 {
    m as f64 * (1.0 + tau_m / (h as f64).sqrt())
}

/// Block-energy test: statistic `sum_s (sum_{i in I_s} y_i)^2` over the
/// blocks of `plan`, rejecting above `m (1 + tau_m / sqrt(h))`.
pub fn block_energy_test(t: &Transcript, plan: &BlockPlan, tau_m: f64) -> Result<TestOutcome> {
    if t.len() != plan.m {
        return Err(Error::parameter(format!(
            "transcript has {} measurements but the block plan covers {}",
            t.len(),
            plan.m
        )));
    }
    let mut statistic = 0.0;
    let mut offset = 0;
    for &size in &plan.sizes {
        let block_sum: f64 = t.entries()[offset..offset + size].iter().map(|e| e.response).sum();
        statistic += block_sum * block_sum;
        offset += size;
    }
    let threshold = block_energy_threshold(plan.m, plan.h, tau_m);
    Ok(TestOutcome::new(
        statistic,
        threshold,
        Descriptor::new("block_energy").with("h", plan.h).with("tau_m", tau_m),
    ))
}

/// Scan statistic over coordinate observations: the maximum length-S window
/// sum, circular when `circular` is set.
pub fn scan_test(y: &[f64], s: usize, threshold: f64, circular: bool) -> Result<TestOutcome> {
    let n = y.len();
    if n == 0 {
        return Err(Error::parameter("scan test requires a nonempty observation vector"));
    }
    if s == 0 || s > n {
        return Err(Error::parameter(format!(
            "scan window S = {s} must satisfy 1 <= S <= n = {n}"
        )));
    }
    let mut window: f64 = y[..s].iter().sum();
    let mut statistic = window;
    let steps = if circular { n - 1 } else { n - s };
    for t in 0..steps {
        window += y[(t + s) % n] - y[t];
        statistic = statistic.max(window);
    }
    Ok(TestOutcome::new(
        statistic,
        threshold,
        Descriptor::new("scan").with("s", s).with("circular", circular),
    ))
}

/// Asymptotic scan threshold scale `sigma sqrt(2 S log+(n/S))` with
/// `log+(x) = max(log x, 1)`.
pub fn scan_theory_threshold(n: usize, s: usize, sigma: f64) -> f64 {
    let log_plus = (n as f64 / s as f64).ln().max(1.0);
    sigma * (2.0 * s as f64 * log_plus).sqrt()
}

/// Energy test for fixed designs: statistic `sum y_i^2`.
pub fn fixed_design_energy_test(t: &Transcript, threshold: f64) -> Result<TestOutcome> {
    if t.is_empty() {
        return Err(Error::parameter("energy test requires a nonempty transcript"));
    }
    let statistic = t.responses().map(|y| y * y).sum();
    Ok(TestOutcome::new(statistic, threshold, Descriptor::new("energy")))
}

/// Max-correlation test for fixed designs: statistic
/// `max_j |sum_i a_ij y_i|`. The design rows must match the transcript's
/// measurement vectors.
pub fn max_correlation_test(
    t: &Transcript,
    design: &[Arc<[f64]>],
    threshold: f64,
) -> Result<TestOutcome> {
    if t.is_empty() {
        return Err(Error::parameter("max-correlation test requires a nonempty transcript"));
    }
    if design.len() != t.len() {
        return Err(Error::dimension(format!(
            "design has {} rows but the transcript has {} measurements",
            design.len(),
            t.len()
        )));
    }
    let n = t.dimension();
    for (i, (row, entry)) in design.iter().zip(t.entries()).enumerate() {
        if row.len() != n {
            return Err(Error::dimension(format!("design row {i} has length {}", row.len())));
        }
        if !Arc::ptr_eq(row, &entry.vector) && row.as_ref() != entry.vector.as_ref() {
            return Err(Error::dimension(format!(
                "design row {i} does not match the transcript's measurement vector"
            )));
        }
    }
    let mut columns = vec![0.0; n];
    for entry in t.entries() {
        let y = entry.response;
        for (acc, &a) in columns.iter_mut().zip(entry.vector.iter()) {
            *acc += a * y;
        }
    }
    let statistic = columns.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    Ok(TestOutcome::new(statistic, threshold, Descriptor::new("max_correlation")))
}

/// Exact likelihood ratio of the transcript under the prior mixture versus
/// the null, computed by enumeration over the prior's support in log space:
///
/// `L = E_pi exp( sum_i y_i <a_i, x> - <a_i, x>^2 / 2 )`
///
/// Returns `L` and the Neyman-Pearson test at threshold 1 (the rejection
/// decision is taken on `log L > 0`, so it stays exact even when `L`
/// saturates in floating point).
pub fn exact_lrt(t: &Transcript, prior: &Prior) -> Result<(f64, TestOutcome)> {
    prior.validate()?;
    if !prior.is_enumerable() {
        return Err(Error::Capacity(format!(
            "prior support has {} atoms, above the enumeration capacity {}",
            prior.support_size(),
            ENUMERATION_CAPACITY
        )));
    }
    if prior.n != t.dimension() {
        return Err(Error::dimension(format!(
            "prior dimension {} but transcript dimension {}",
            prior.n,
            t.dimension()
        )));
    }
    // Streaming log-sum-exp over atom weights.
    let mut max_w = f64::NEG_INFINITY;
    let mut scaled_sum = 0.0;
    let mut count: u64 = 0;
    prior.for_each_atom(|atom| {
        let mut w = 0.0;
        for entry in t.entries() {
            let d: f64 = atom.iter().map(|&(j, v)| entry.vector[j] * v).sum();
            w += entry.response * d - 0.5 * d * d;
        }
        if w > max_w {
            scaled_sum = scaled_sum * (max_w - w).exp() + 1.0;
            max_w = w;
        } else {
            scaled_sum += (w - max_w).exp();
        }
        count += 1;
    });
    let log_l = max_w + scaled_sum.ln() - (count as f64).ln();
    let l = log_l.exp();
    let outcome = TestOutcome {
        statistic: l,
        threshold: 1.0,
        reject: log_l > 0.0,
        detector: Descriptor::new("lrt")
            .with("prior", prior.kind_name())
            .with("s", prior.s)
            .with("mu", prior.mu),
    };
    Ok((l, outcome))
}

/// Serializable description of a detector, evaluated against transcripts by
/// the risk machinery.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorSpec {
    Sum { tau: f64 },
    BlockEnergy { tau_m: f64 },
    FixedEnergy { threshold: f64 },
    MaxCorrelation { threshold: f64 },
    Lrt { prior: Prior },
    Scan { s: usize, threshold: f64, circular: bool },
}

impl DetectorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorSpec::Sum { .. } => "sum",
            DetectorSpec::BlockEnergy { .. } => "block_energy",
            DetectorSpec::FixedEnergy { .. } => "energy",
            DetectorSpec::MaxCorrelation { .. } => "max_correlation",
            DetectorSpec::Lrt { .. } => "lrt",
            DetectorSpec::Scan { .. } => "scan",
        }
    }

    pub fn params_string(&self) -> String {
        match self {
            DetectorSpec::Sum { tau } => format!("tau={tau}"),
            DetectorSpec::BlockEnergy { tau_m } => format!("tau_m={tau_m}"),
            DetectorSpec::FixedEnergy { threshold } => format!("threshold={threshold}"),
            DetectorSpec::MaxCorrelation { threshold } => format!("threshold={threshold}"),
            DetectorSpec::Lrt { prior } => {
                format!("prior={};s={};mu={}", prior.kind_name(), prior.s, prior.mu)
            }
            DetectorSpec::Scan { s, threshold, circular } => {
                format!("s={s};threshold={threshold};circular={circular}")
            }
        }
    }

    /// Evaluate the detector on a transcript produced by `scheme`.
    ///
    /// Block-energy uses the scheme's own block plan when it has one and
    /// unit blocks otherwise; max-correlation reads the design from the
    /// scheme when it exposes one and from the transcript itself otherwise;
    /// the scan detector requires the coordinate scheme, whose responses it
    /// rescales into classical per-coordinate observations.
    pub fn evaluate(&self, t: &Transcript, scheme: &Scheme) -> Result<TestOutcome> {
        match self {
            DetectorSpec::Sum { tau } => sum_test(t, *tau),
            DetectorSpec::BlockEnergy { tau_m } => match scheme.block_plan() {
                Some(plan) => block_energy_test(t, plan, *tau_m),
                None => block_energy_test(t, &BlockPlan::balanced(t.len(), t.len())?, *tau_m),
            },
            DetectorSpec::FixedEnergy { threshold } => fixed_design_energy_test(t, *threshold),
            DetectorSpec::MaxCorrelation { threshold } => match scheme.design_rows() {
                Some(rows) => max_correlation_test(t, rows, *threshold),
                None => {
                    let rows: Vec<Arc<[f64]>> = t.vectors().cloned().collect();
                    max_correlation_test(t, &rows, *threshold)
                }
            },
            DetectorSpec::Lrt { prior } => Ok(exact_lrt(t, prior)?.1),
            DetectorSpec::Scan { s, threshold, circular } => {
                let Scheme::Coordinate(_) = scheme else {
                    return Err(Error::parameter(
                        "scan detector requires the coordinate scheme".to_string(),
                    ));
                };
                if t.len() != t.dimension() {
                    return Err(Error::dimension(format!(
                        "coordinate transcript has {} of {} measurements",
                        t.len(),
                        t.dimension()
                    )));
                }
                let scale = (t.dimension() as f64 / t.energy_used()).sqrt();
                let y: Vec<f64> = t.responses().map(|v| v * scale).collect();
                scan_test(&y, *s, *threshold, *circular)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Entry;
    use approx::assert_abs_diff_eq;

    fn transcript_from_responses(n: usize, a: &[f64], ys: &[f64]) -> Transcript {
        let v: Arc<[f64]> = Arc::from(a.to_vec().into_boxed_slice());
        Transcript::from_entries(
            n,
            ys.iter().map(|&y| Entry { vector: v.clone(), response: y }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn sum_test_examples() {
        let t = transcript_from_responses(4, &[0.5; 4], &[1.0, 1.0, 1.0, 1.0]);
        let out = sum_test(&t, 1.5).unwrap();
        assert_abs_diff_eq!(out.statistic, 2.0, epsilon = 1e-12);
        assert!(out.reject);

        // Zero responses at tau = 0: strict inequality keeps the null.
        let t = transcript_from_responses(4, &[0.5; 4], &[0.0; 9]);
        let out = sum_test(&t, 0.0).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.reject);

        assert!(sum_test(&Transcript::new(4), 0.0).is_err());
    }

    #[test]
    fn sum_test_risk_closed_form() {
        assert_abs_diff_eq!(sum_test_risk(10, 3.0, 0.0, 1.7), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sum_test_risk(10, 3.0, 0.0, 0.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sum_test_risk(100, 25.0, 4.0, 1.6449), 0.411253, epsilon = 1e-5);
    }

    #[test]
    fn block_threshold_arithmetic() {
        assert_abs_diff_eq!(block_energy_threshold(100, 4, 3.0), 250.0, epsilon = 1e-12);
    }

    #[test]
    fn block_energy_requires_matching_plan() {
        let t = transcript_from_responses(2, &[0.5, 0.5], &[1.0; 6]);
        let plan = BlockPlan::balanced(5, 2).unwrap();
        assert!(block_energy_test(&t, &plan, 1.0).is_err());
        let plan = BlockPlan::balanced(6, 3).unwrap();
        let out = block_energy_test(&t, &plan, 0.0).unwrap();
        // Three blocks of two unit responses: 3 * (2^2) = 12.
        assert_abs_diff_eq!(out.statistic, 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.threshold, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn scan_noiseless_window_sum() {
        // Interval signal with S = 3, mu = 2, no noise: statistic is S * mu.
        let mut y = vec![0.0; 8];
        for j in 2..5 {
            y[j] = 2.0;
        }
        let out = scan_test(&y, 3, 5.0, true).unwrap();
        assert_abs_diff_eq!(out.statistic, 6.0, epsilon = 1e-12);
        assert!(out.reject);
    }

    #[test]
    fn scan_full_window_reduces_to_sum() {
        let y: Vec<f64> = (0..8).map(|j| j as f64 - 3.0).collect();
        let total: f64 = y.iter().sum();
        let out = scan_test(&y, 8, 100.0, true).unwrap();
        assert_abs_diff_eq!(out.statistic, total, epsilon = 1e-12);
        let out = scan_test(&y, 8, 100.0, false).unwrap();
        assert_abs_diff_eq!(out.statistic, total, epsilon = 1e-12);
    }

    #[test]
    fn scan_matches_naive_window_maximum() {
        // Independent oracle: direct O(nS) window sums.
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        for _ in 0..50 {
            let n = 17;
            let s = 1 + rng.gen_range(0..n);
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for circular in [true, false] {
                let naive = {
                    let starts = if circular { n } else { n - s + 1 };
                    (0..starts)
                        .map(|t| (0..s).map(|k| y[(t + k) % n]).sum::<f64>())
                        .fold(f64::NEG_INFINITY, f64::max)
                };
                let out = scan_test(&y, s, 0.0, circular).unwrap();
                assert_abs_diff_eq!(out.statistic, naive, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn scan_rejects_oversized_window() {
        assert!(scan_test(&[1.0, 2.0], 3, 0.0, true).is_err());
    }

    #[test]
    fn scan_theory_threshold_value() {
        // sigma sqrt(2 S log+(n/S)) at n = 10^4, S = 100, sigma = 10.
        assert_abs_diff_eq!(scan_theory_threshold(10_000, 100, 10.0), 303.48543, epsilon = 1e-4);
        // log+ floors at 1.
        assert_abs_diff_eq!(
            scan_theory_threshold(10, 10, 2.0),
            2.0 * (2.0 * 10.0f64).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn energy_test_values() {
        let t = transcript_from_responses(2, &[0.5, 0.5], &[0.0; 5]);
        let out = fixed_design_energy_test(&t, 1.0).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.reject);
        let t = transcript_from_responses(2, &[0.5, 0.5], &[3.0; 7]);
        let out = fixed_design_energy_test(&t, 1.0).unwrap();
        assert_abs_diff_eq!(out.statistic, 63.0, epsilon = 1e-12);
    }

    #[test]
    fn max_correlation_single_column() {
        let rows: Vec<Arc<[f64]>> =
            vec![Arc::from(vec![1.0].into_boxed_slice()), Arc::from(vec![-1.0].into_boxed_slice())];
        let t = Transcript::from_entries(
            1,
            vec![
                Entry { vector: rows[0].clone(), response: 2.0 },
                Entry { vector: rows[1].clone(), response: 0.5 },
            ],
        )
        .unwrap();
        let out = max_correlation_test(&t, &rows, 1.0).unwrap();
        assert_abs_diff_eq!(out.statistic, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn max_correlation_rejects_mismatched_design() {
        let row: Arc<[f64]> = Arc::from(vec![1.0, 0.0].into_boxed_slice());
        let other: Arc<[f64]> = Arc::from(vec![0.0, 1.0].into_boxed_slice());
        let t = Transcript::from_entries(2, vec![Entry { vector: row, response: 1.0 }]).unwrap();
        assert!(max_correlation_test(&t, &[other], 0.0).is_err());
        assert!(max_correlation_test(&t, &[], 0.0).is_err());
    }

    #[test]
    fn max_correlation_noiseless_one_sparse_hits_its_column() {
        // x = mu e_j without noise: column j accumulates mu * sum_i a_ij^2 =
        // mu m / n exactly; cross columns are random-sign sums bounded by it.
        use crate::schemes::fixed_bernoulli_design;
        let (n, m, mu, j) = (6usize, 64usize, 3.0f64, 2usize);
        let design = fixed_bernoulli_design(n, m, 13).unwrap();
        let entries: Vec<Entry> = design
            .design_rows()
            .iter()
            .map(|row| Entry { vector: row.clone(), response: row[j] * mu })
            .collect();
        let t = Transcript::from_entries(n, entries).unwrap();
        let out = max_correlation_test(&t, design.design_rows(), 0.0).unwrap();
        let column_j = mu * m as f64 / n as f64;
        // Brute-force every column as an independent check.
        let mut brute = vec![0.0; n];
        for row in design.design_rows() {
            for (k, acc) in brute.iter_mut().enumerate() {
                *acc += row[k] * row[j] * mu;
            }
        }
        assert_abs_diff_eq!(brute[j], column_j, epsilon = 1e-10);
        let brute_max = brute.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        assert_abs_diff_eq!(out.statistic, brute_max, epsilon = 1e-10);
        assert!(out.statistic >= column_j - 1e-10);
    }

    #[test]
    fn lrt_of_zero_amplitude_prior_is_exactly_one() {
        let prior = Prior::new(PriorKind::NonnegUniform, 4, 2, 0.0);
        let t = transcript_from_responses(4, &[0.5; 4], &[1.0, -2.0, 0.3]);
        let (l, out) = exact_lrt(&t, &prior).unwrap();
        assert_eq!(l, 1.0);
        assert!(!out.reject);
    }

    #[test]
    fn lrt_single_atom_matches_direct_formula() {
        // n = 1, S = 1, one measurement (a, y): L = exp(y a mu - (a mu)^2 / 2).
        let (a, y, mu) = (0.8, 1.3, 2.0);
        let prior = Prior::new(PriorKind::NonnegUniform, 1, 1, mu);
        let t = transcript_from_responses(1, &[a], &[y]);
        let (l, _) = exact_lrt(&t, &prior).unwrap();
        let direct = (y * a * mu - (a * mu) * (a * mu) / 2.0).exp();
        assert!((l - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn lrt_capacity_error() {
        let prior = Prior::new(PriorKind::SignedUniform, 100, 50, 1.0);
        let t = transcript_from_responses(100, &[0.1; 100], &[0.0]);
        assert!(matches!(exact_lrt(&t, &prior), Err(Error::Capacity(_))));
    }

    #[test]
    fn prior_support_sizes() {
        assert_eq!(Prior::new(PriorKind::NonnegUniform, 6, 2, 1.0).support_size(), 15);
        assert_eq!(Prior::new(PriorKind::SignedUniform, 6, 2, 1.0).support_size(), 60);
        assert_eq!(Prior::new(PriorKind::IntervalUniform, 6, 2, 1.0).support_size(), 6);
        let mut count = 0u64;
        Prior::new(PriorKind::SignedUniform, 5, 2, 1.0).for_each_atom(|atom| {
            assert_eq!(atom.len(), 2);
            count += 1;
        });
        assert_eq!(count, 40);
    }

    #[test]
    fn default_tau_matches_normal_quantile() {
        assert_abs_diff_eq!(default_tau(0.05), 1.6448536, epsilon = 1e-6);
        assert!(theory_tau_m(10_000) > theory_tau_m(100));
    }
}
