//! Signals, the noisy linear measurement channel, and the adaptive sensing
//! session loop with budget enforcement.
//!
//! A session observes an unknown vector `x` through responses
//! `y_i = <a_i, x> + z_i` with i.i.d. standard normal noise, where each
//! measurement vector `a_i` may depend on the full history
//! `(a_1, y_1, ..., a_{i-1}, y_{i-1})`. Budgets either cap the number of
//! unit-norm measurements or the total energy `sum ||a_i||^2`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::schemes::Strategy;

/// Absolute slack applied to computed norms when enforcing budgets, so that
/// vectors like `1/sqrt(n) * ones` are not rejected for floating-point
/// round-off in their norm.
pub const BUDGET_SLACK: f64 = 1e-12;

/// The alternative classes a signal can be drawn from, or an explicit vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// The null vector.
    Zero,
    /// Exactly S entries equal to mu on a uniformly random support.
    NonnegSparse,
    /// Exactly S entries equal to +-mu with independent equiprobable signs
    /// on a uniformly random support.
    SignedSparse,
    /// Support is a contiguous block of length S; entries mu, or +-mu when
    /// `signed` is set.
    Interval { signed: bool },
    /// A fixed, caller-supplied vector.
    Explicit,
}

/// Parametric description of a signal class.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    /// Ambient dimension.
    pub n: usize,
    /// Support size; unused for `Zero` and `Explicit`.
    pub s: usize,
    /// Per-coordinate amplitude; unused for `Zero` and `Explicit`.
    pub mu: f64,
    /// Explicit entries; only populated for `Explicit`.
    pub values: Vec<f64>,
    /// Whether interval supports wrap around modulo n. All n placements are
    /// then support-size-S, which keeps the class prior exchangeable.
    pub circular: bool,
}

impl SignalSpec {
    pub fn zero(n: usize) -> Self {
        SignalSpec { kind: SignalKind::Zero, n, s: 0, mu: 0.0, values: Vec::new(), circular: true }
    }

    pub fn nonneg_sparse(n: usize, s: usize, mu: f64) -> Self {
        SignalSpec { kind: SignalKind::NonnegSparse, n, s, mu, values: Vec::new(), circular: true }
    }

    pub fn signed_sparse(n: usize, s: usize, mu: f64) -> Self {
        SignalSpec { kind: SignalKind::SignedSparse, n, s, mu, values: Vec::new(), circular: true }
    }

    pub fn interval(n: usize, s: usize, mu: f64) -> Self {
        SignalSpec {
            kind: SignalKind::Interval { signed: false },
            n,
            s,
            mu,
            values: Vec::new(),
            circular: true,
        }
    }

    pub fn interval_signed(n: usize, s: usize, mu: f64) -> Self {
        SignalSpec {
            kind: SignalKind::Interval { signed: true },
            n,
            s,
            mu,
            values: Vec::new(),
            circular: true,
        }
    }

    pub fn explicit(values: Vec<f64>) -> Self {
        let n = values.len();
        SignalSpec { kind: SignalKind::Explicit, n, s: 0, mu: 0.0, values, circular: true }
    }

    /// Switch interval placement to linear (no wrap-around); the support
    /// start is then uniform over the n - S + 1 admissible positions.
    pub fn with_linear_placement(mut self) -> Self {
        self.circular = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::parameter("signal dimension n must be positive"));
        }
        match self.kind {
            SignalKind::Zero => Ok(()),
            SignalKind::Explicit => {
                if self.values.len() != self.n {
                    Err(Error::dimension(format!(
                        "explicit signal has {} entries for dimension {}",
                        self.values.len(),
                        self.n
                    )))
                } else {
                    Ok(())
                }
            }
            _ => {
                if self.s == 0 || self.s > self.n {
                    return Err(Error::parameter(format!(
                        "support size S = {} must satisfy 1 <= S <= n = {}",
                        self.s, self.n
                    )));
                }
                if !(self.mu >= 0.0) {
                    return Err(Error::parameter(format!(
                        "amplitude mu = {} must be nonnegative",
                        self.mu
                    )));
                }
                if !self.circular && matches!(self.kind, SignalKind::Interval { .. }) && self.s > self.n
                {
                    return Err(Error::parameter("linear interval longer than dimension"));
                }
                Ok(())
            }
        }
    }
}

/// Draw one member of the class described by `spec`. Random kinds use the
/// uniform prior over the class: uniformly random size-S supports (or
/// interval placements) and, where applicable, independent equiprobable
/// signs.
pub fn realize_signal<R: Rng + ?Sized>(spec: &SignalSpec, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut x = vec![0.0; spec.n];
    match spec.kind {
        SignalKind::Zero => {}
        SignalKind::Explicit => x.copy_from_slice(&spec.values),
        SignalKind::NonnegSparse => {
            for j in sample_support(spec.n, spec.s, rng) {
                x[j] = spec.mu;
            }
        }
        SignalKind::SignedSparse => {
            for j in sample_support(spec.n, spec.s, rng) {
                x[j] = if rng.gen_bool(0.5) { spec.mu } else { -spec.mu };
            }
        }
        SignalKind::Interval { signed } => {
            let start = if spec.circular {
                rng.gen_range(0..spec.n)
            } else {
                rng.gen_range(0..=(spec.n - spec.s))
            };
            for k in 0..spec.s {
                let j = (start + k) % spec.n;
                x[j] = if signed && rng.gen_bool(0.5) { -spec.mu } else { spec.mu };
            }
        }
    }
    Ok(x)
}

/// Uniformly random size-s subset of {0, ..., n-1}, in sorted order.
fn sample_support<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, n, s).into_vec();
    idx.sort_unstable();
    idx
}

/// Measurement budget for one sensing session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// At most `m` measurements, each with norm at most 1.
    Count { m: u64 },
    /// Total energy `sum ||a_i||^2 <= m`; the number of measurements is
    /// unrestricted and `m` need not be an integer.
    Energy { m: f64 },
}

impl Budget {
    pub fn count(m: u64) -> Self {
        Budget::Count { m }
    }

    pub fn energy(m: f64) -> Self {
        Budget::Energy { m }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            Budget::Count { .. } => "count",
            Budget::Energy { .. } => "energy",
        }
    }

    /// The budget size as a real number (count budgets report m).
    pub fn size(&self) -> f64 {
        match *self {
            Budget::Count { m } => m as f64,
            Budget::Energy { m } => m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Budget::Count { .. } => Ok(()),
            Budget::Energy { m } => {
                if m >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::parameter(format!("energy budget {m} must be nonnegative")))
                }
            }
        }
    }
}

/// What a strategy may still spend at the current point of a session.
#[derive(Debug, Clone, Copy)]
pub struct BudgetRemaining {
    /// Measurements left under a count budget.
    pub measurements: Option<u64>,
    /// Energy left under an energy budget.
    pub energy: Option<f64>,
}

/// One accepted measurement: the vector that was applied and the response.
#[derive(Debug, Clone)]
pub struct Entry {
    pub vector: Arc<[f64]>,
    pub response: f64,
}

/// Ordered record of the (measurement vector, response) pairs of one session.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    entries: Vec<Entry>,
    n: usize,
    energy_used: f64,
}

impl Transcript {
    pub fn new(n: usize) -> Self {
        Transcript { entries: Vec::new(), n, energy_used: 0.0 }
    }

    /// Build a transcript from raw entries, validating dimensions. Intended
    /// for feeding detectors directly in tests and tools.
    pub fn from_entries(n: usize, entries: Vec<Entry>) -> Result<Self> {
        let mut t = Transcript::new(n);
        for e in entries {
            if e.vector.len() != n {
                return Err(Error::dimension(format!(
                    "entry vector has length {} for dimension {n}",
                    e.vector.len()
                )));
            }
            t.push(e);
        }
        Ok(t)
    }

    fn push(&mut self, entry: Entry) {
        self.energy_used += squared_norm(&entry.vector);
        self.entries.push(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Total energy spent: `sum ||a_i||^2`.
    pub fn energy_used(&self) -> f64 {
        self.energy_used
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn responses(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.response)
    }

    pub fn vectors(&self) -> impl Iterator<Item = &Arc<[f64]>> + '_ {
        self.entries.iter().map(|e| &e.vector)
    }
}

pub(crate) fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One noisy linear measurement: `<a, x> + z` with a fresh standard normal
/// draw `z` from `rng`.
pub fn measure<R: Rng + ?Sized>(x: &[f64], a: &[f64], rng: &mut R) -> Result<f64> {
    if x.len() != a.len() {
        return Err(Error::dimension(format!(
            "signal has length {} but measurement vector has length {}",
            x.len(),
            a.len()
        )));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(dot(a, x) + z)
}

/// Coordinate-wise observations `y_j = x_j + sigma z_j` with
/// `sigma = sqrt(n / m)`, the classical normal-mean sampling that spends a
/// total energy of `m` by measuring every coordinate once with
/// `sqrt(m/n) e_j`. Noise draws consume one value per coordinate, in
/// coordinate order, exactly like the equivalent sensing session.
pub fn classic_observations<R: Rng + ?Sized>(
    x: &[f64],
    m_energy: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(m_energy > 0.0) {
        return Err(Error::parameter(format!("energy budget {m_energy} must be positive")));
    }
    let sigma = (x.len() as f64 / m_energy).sqrt();
    Ok(x.iter().map(|&xj| xj + sigma * rng.sample::<f64, _>(StandardNormal)).collect())
}

/// Run one sensing session: offer the strategy the full history before each
/// proposal, enforce the budget on every accepted vector, and stop when the
/// strategy declines or the budget is exhausted.
///
/// Noise draws consume exactly one value from `rng` per accepted
/// measurement, after any randomness the strategy consumed at its own
/// construction; the fixed interleaving makes adaptive sessions
/// reproducible.
pub fn run_session<R: Rng + ?Sized>(
    strategy: &dyn Strategy,
    x: &[f64],
    budget: &Budget,
    rng: &mut R,
) -> Result<Transcript> {
    budget.validate()?;
    if strategy.dimension() != x.len() {
        return Err(Error::dimension(format!(
            "strategy dimension {} but signal dimension {}",
            strategy.dimension(),
            x.len()
        )));
    }
    let mut transcript = Transcript::new(x.len());
    loop {
        let remaining = match *budget {
            Budget::Count { m } => {
                let left = m.saturating_sub(transcript.len() as u64);
                if left == 0 {
                    break;
                }
                BudgetRemaining { measurements: Some(left), energy: None }
            }
            Budget::Energy { m } => {
                let left = m - transcript.energy_used();
                if left <= BUDGET_SLACK {
                    break;
                }
                BudgetRemaining { measurements: None, energy: Some(left) }
            }
        };
        let Some(a) = strategy.propose(&transcript, &remaining) else {
            break;
        };
        let index = transcript.len();
        if a.len() != x.len() {
            return Err(Error::dimension(format!(
                "proposal {index} has length {} for dimension {}",
                a.len(),
                x.len()
            )));
        }
        match *budget {
            Budget::Count { .. } => {
                let norm_sq = squared_norm(&a);
                if norm_sq > 1.0 + BUDGET_SLACK {
                    return Err(Error::BudgetViolation {
                        index,
                        detail: format!("norm {} exceeds 1 under a count budget", norm_sq.sqrt()),
                    });
                }
            }
            Budget::Energy { m } => {
                let norm_sq = squared_norm(&a);
                if transcript.energy_used() + norm_sq > m + BUDGET_SLACK {
                    return Err(Error::BudgetViolation {
                        index,
                        detail: format!(
                            "energy {} plus already-spent {} exceeds budget {m}",
                            norm_sq,
                            transcript.energy_used()
                        ),
                    });
                }
            }
        }
        let response = measure(x, &a, rng)?;
        transcript.push(Entry { vector: a, response });
    }
    Ok(transcript)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{trial_rng, Arm};
    use crate::schemes::{constant_scheme, energy_constant_scheme, Descriptor};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn zero_signal_is_all_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = realize_signal(&SignalSpec::zero(5), &mut rng).unwrap();
        assert_eq!(x, vec![0.0; 5]);
    }

    #[test]
    fn full_support_nonneg_is_deterministic() {
        // S = n forces the unique member of the class.
        for seed in 0..8 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = realize_signal(&SignalSpec::nonneg_sparse(4, 4, 2.0), &mut rng).unwrap();
            assert_eq!(x, vec![2.0; 4]);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(realize_signal(&SignalSpec::nonneg_sparse(4, 5, 1.0), &mut rng).is_err());
        assert!(realize_signal(&SignalSpec::nonneg_sparse(4, 2, -1.0), &mut rng).is_err());
        assert!(realize_signal(&SignalSpec::explicit(vec![1.0]), &mut rng).is_ok());
    }

    #[test]
    fn signed_one_sparse_hits_all_four_atoms_uniformly() {
        // n = 2, S = 1: the prior has four atoms, each with probability 1/4.
        let spec = SignalSpec::signed_sparse(2, 1, 1.0);
        let mut counts: HashMap<(i8, i8), u64> = HashMap::new();
        let trials = 100_000;
        for t in 0..trials {
            let mut rng = trial_rng(11, t, Arm::Alternative);
            let x = realize_signal(&spec, &mut rng).unwrap();
            *counts.entry((x[0] as i8, x[1] as i8)).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for (_, c) in counts {
            let freq = c as f64 / trials as f64;
            assert_abs_diff_eq!(freq, 0.25, epsilon = 0.01);
        }
    }

    #[test]
    fn support_frequencies_are_uniform_on_small_classes() {
        let spec = SignalSpec::nonneg_sparse(6, 2, 1.0);
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        let trials = 100_000;
        for t in 0..trials {
            let mut rng = trial_rng(5, t, Arm::Alternative);
            let x = realize_signal(&spec, &mut rng).unwrap();
            let support: Vec<usize> =
                x.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, _)| j).collect();
            *counts.entry(support).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        for (_, c) in counts {
            let freq = c as f64 / trials as f64;
            assert_abs_diff_eq!(freq, 1.0 / 15.0, epsilon = 0.01);
        }
    }

    #[test]
    fn interval_supports_are_contiguous() {
        let spec = SignalSpec::interval(7, 3, 2.0);
        for t in 0..200 {
            let mut rng = trial_rng(9, t, Arm::Alternative);
            let x = realize_signal(&spec, &mut rng).unwrap();
            let support: Vec<usize> =
                x.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, _)| j).collect();
            assert_eq!(support.len(), 3);
            let contiguous = (0..7).any(|start| {
                (0..3).all(|k| support.contains(&((start + k) % 7)))
            });
            assert!(contiguous, "support {support:?} not a circular interval");
            assert!(x.iter().all(|&v| v == 0.0 || v == 2.0));
        }
        // Linear placement never wraps.
        let spec = SignalSpec::interval(7, 3, 2.0).with_linear_placement();
        for t in 0..200 {
            let mut rng = trial_rng(10, t, Arm::Alternative);
            let x = realize_signal(&spec, &mut rng).unwrap();
            let first = x.iter().position(|&v| v != 0.0).unwrap();
            assert!(first + 3 <= 7);
            assert!(x[first..first + 3].iter().all(|&v| v == 2.0));
        }
    }

    #[test]
    fn measure_with_zero_vector_is_standard_normal() {
        let x = vec![3.0, -1.0, 2.0];
        let a = vec![0.0; 3];
        let draws = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..draws {
            let y = measure(&x, &a, &mut rng).unwrap();
            sum += y;
            sum_sq += y * y;
        }
        let mean = sum / draws as f64;
        let var = sum_sq / draws as f64 - mean * mean;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 0.02);
        assert_abs_diff_eq!(var, 1.0, epsilon = 0.03);
    }

    #[test]
    fn measure_constant_vector_recovers_l1_norm() {
        // a = ones/sqrt(n) on a nonnegative x: mean response is |x|/sqrt(n).
        let n = 16;
        let x: Vec<f64> = (0..n).map(|j| (j % 3) as f64).collect();
        let l1: f64 = x.iter().sum();
        let a: Vec<f64> = vec![1.0 / (n as f64).sqrt(); n];
        let draws = 100_000;
        let mut sum = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..draws {
            sum += measure(&x, &a, &mut rng).unwrap();
        }
        let mean = sum / draws as f64;
        let tol = 3.0 / (draws as f64).sqrt();
        assert_abs_diff_eq!(mean, l1 / (n as f64).sqrt(), epsilon = tol);
    }

    #[test]
    fn measure_rejects_dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(measure(&[1.0, 2.0], &[1.0], &mut rng).is_err());
    }

    #[test]
    fn constant_session_records_m_constant_vectors() {
        let strategy = constant_scheme(4, 3).unwrap();
        let x = vec![0.0; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = run_session(&strategy, &x, &Budget::count(3), &mut rng).unwrap();
        assert_eq!(t.len(), 3);
        for v in t.vectors() {
            assert_eq!(v.as_ref(), &[0.5, 0.5, 0.5, 0.5]);
        }
    }

    #[test]
    fn energy_overdraw_is_a_budget_violation_with_index() {
        struct Greedy;
        impl Strategy for Greedy {
            fn dimension(&self) -> usize {
                4
            }
            fn propose(&self, _: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
                // Squared norm 2.5 > energy budget 2.
                Some(Arc::from(vec![0.790569415; 4].into_boxed_slice()))
            }
            fn descriptor(&self) -> Descriptor {
                Descriptor::new("greedy")
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let err = run_session(&Greedy, &[0.0; 4], &Budget::energy(2.0), &mut rng).unwrap_err();
        match err {
            Error::BudgetViolation { index, .. } => assert_eq!(index, 0),
            other => panic!("expected budget violation, got {other:?}"),
        }
    }

    #[test]
    fn count_budget_rejects_oversized_norm() {
        struct Loud;
        impl Strategy for Loud {
            fn dimension(&self) -> usize {
                2
            }
            fn propose(&self, _: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
                Some(Arc::from(vec![1.0, 1.0].into_boxed_slice()))
            }
            fn descriptor(&self) -> Descriptor {
                Descriptor::new("loud")
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let err = run_session(&Loud, &[0.0; 2], &Budget::count(5), &mut rng).unwrap_err();
        assert!(matches!(err, Error::BudgetViolation { index: 0, .. }));
    }

    #[test]
    fn sessions_are_reproducible_from_the_seed() {
        let strategy = constant_scheme(8, 5).unwrap();
        let x: Vec<f64> = (0..8).map(|j| j as f64 / 8.0).collect();
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_session(&strategy, &x, &Budget::count(5), &mut rng).unwrap()
        };
        let (a, b) = (run(7), run(7));
        for (ea, eb) in a.entries().iter().zip(b.entries()) {
            assert_eq!(ea.response.to_bits(), eb.response.to_bits());
        }
    }

    #[test]
    fn count_transcripts_respect_norm_and_count_invariants() {
        for n in [3usize, 7, 31] {
            let strategy = constant_scheme(n, 6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let t = run_session(&strategy, &vec![0.0; n], &Budget::count(6), &mut rng).unwrap();
            assert!(t.len() as u64 <= 6);
            for v in t.vectors() {
                assert!(squared_norm(v) <= 1.0 + BUDGET_SLACK);
            }
        }
    }

    #[test]
    fn energy_transcripts_respect_energy_invariant() {
        let strategy = energy_constant_scheme(4, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let t = run_session(&strategy, &[0.0; 4], &Budget::energy(2.0), &mut rng).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.energy_used() <= 2.0 + BUDGET_SLACK);
    }

    #[test]
    fn adaptive_strategies_see_the_full_history() {
        // Follows the sign of the previous response; checks the engine hands
        // over history in measurement order.
        struct SignFollower;
        impl Strategy for SignFollower {
            fn dimension(&self) -> usize {
                2
            }
            fn propose(&self, history: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
                let v = match history.entries().last() {
                    None => vec![1.0, 0.0],
                    Some(e) if e.response > 0.0 => vec![0.0, 1.0],
                    Some(_) => vec![0.0, -1.0],
                };
                Some(Arc::from(v.into_boxed_slice()))
            }
            fn descriptor(&self) -> Descriptor {
                Descriptor::new("sign-follower")
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let t = run_session(&SignFollower, &[0.0, 0.0], &Budget::count(4), &mut rng).unwrap();
        assert_eq!(t.len(), 4);
        for (prev, next) in t.entries().iter().zip(t.entries().iter().skip(1)) {
            let expected = if prev.response > 0.0 { vec![0.0, 1.0] } else { vec![0.0, -1.0] };
            assert_eq!(next.vector.as_ref(), expected.as_slice());
        }
    }

    #[test]
    fn classic_observations_match_coordinate_session() {
        use crate::schemes::coordinate_scheme;
        let n = 6;
        let m = 3.0;
        let x: Vec<f64> = (0..n).map(|j| j as f64 * 0.3).collect();
        let strategy = coordinate_scheme(n, m).unwrap();
        let mut rng_a = ChaCha8Rng::seed_from_u64(123);
        let t = run_session(&strategy, &x, &Budget::energy(m), &mut rng_a).unwrap();
        let mut rng_b = ChaCha8Rng::seed_from_u64(123);
        let classic = classic_observations(&x, m, &mut rng_b).unwrap();
        assert_eq!(t.len(), n);
        let scale = (n as f64 / m).sqrt();
        for (entry, c) in t.entries().iter().zip(&classic) {
            assert_abs_diff_eq!(entry.response * scale, *c, epsilon = 1e-12);
        }
    }
}
