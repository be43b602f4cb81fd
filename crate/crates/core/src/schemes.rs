//! Concrete measurement strategies. All schemes here are non-adaptive but
//! implemented against the adaptive [`Strategy`] interface so the session
//! engine treats them uniformly.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Budget, BudgetRemaining, Transcript};

/// Scheme or detector provenance: a name plus its parameters, serialized
/// into output files.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub name: &'static str,
    pub params: Vec<(&'static str, String)>,
}

impl Descriptor {
    pub fn new(name: &'static str) -> Self {
        Descriptor { name, params: Vec::new() }
    }

    pub fn with(mut self, key: &'static str, value: impl ToString) -> Self {
        self.params.push((key, value.to_string()));
        self
    }

    /// Compact `key=value;key=value` rendering for CSV fields.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A measurement policy: given the history and the remaining budget, emit
/// the next measurement vector or decline to end the session.
pub trait Strategy: Send + Sync {
    fn dimension(&self) -> usize;
    fn propose(&self, history: &Transcript, remaining: &BudgetRemaining) -> Option<Arc<[f64]>>;
    fn descriptor(&self) -> Descriptor;
}

/// Partition of m measurements into h blocks with balanced sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub m: usize,
    pub h: usize,
    pub sizes: Vec<usize>,
}

impl BlockPlan {
    /// Balanced split: sizes differ by at most one, largest blocks first.
    pub fn balanced(m: usize, h: usize) -> Result<Self> {
        if h == 0 || m == 0 {
            return Err(Error::parameter("block plan requires m >= 1 and h >= 1"));
        }
        if h > m {
            return Err(Error::parameter(format!("block count h = {h} exceeds m = {m}")));
        }
        let base = m / h;
        let extra = m % h;
        let sizes = (0..h).map(|s| base + usize::from(s < extra)).collect();
        Ok(BlockPlan { m, h, sizes })
    }

    /// The block index that measurement `i` belongs to.
    pub fn block_of(&self, i: usize) -> usize {
        debug_assert!(i < self.m);
        let mut acc = 0;
        for (s, &size) in self.sizes.iter().enumerate() {
            acc += size;
            if i < acc {
                return s;
            }
        }
        self.h - 1
    }
}

/// Default block count: a slowly growing function of m, clamped to [1, m].
pub fn default_block_count(m: usize) -> usize {
    let log2 = (m.max(1) as f64).log2().ceil() as usize;
    log2.max(4).min(m.max(1))
}

/// Fill a +-1/sqrt(n) vector from the bits of `rng`, 64 signs per word.
fn bernoulli_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Arc<[f64]> {
    let scale = 1.0 / (n as f64).sqrt();
    let mut v = Vec::with_capacity(n);
    let mut bits = 0u64;
    for j in 0..n {
        if j % 64 == 0 {
            bits = rng.next_u64();
        }
        let sign = if bits & 1 == 1 { scale } else { -scale };
        bits >>= 1;
        v.push(sign);
    }
    Arc::from(v.into_boxed_slice())
}

fn constant_vector(n: usize, value: f64) -> Arc<[f64]> {
    Arc::from(vec![value; n].into_boxed_slice())
}

/// Repeats the constant vector `ones/sqrt(n)` for m measurements.
#[derive(Debug, Clone)]
pub struct ConstantScheme {
    n: usize,
    m: usize,
    vector: Arc<[f64]>,
}

/// The constant-vector scheme: propose `ones/sqrt(n)` exactly m times.
pub fn constant_scheme(n: usize, m: usize) -> Result<ConstantScheme> {
    if n == 0 {
        return Err(Error::parameter("dimension n must be positive"));
    }
    Ok(ConstantScheme { n, m, vector: constant_vector(n, 1.0 / (n as f64).sqrt()) })
}

impl Strategy for ConstantScheme {
    fn dimension(&self) -> usize {
        self.n
    }

    fn propose(&self, history: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
        (history.len() < self.m).then(|| self.vector.clone())
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("constant").with("m", self.m)
    }
}

/// Reuses one Bernoulli-ensemble vector per block of measurements.
#[derive(Debug, Clone)]
pub struct BernoulliBlockScheme {
    n: usize,
    plan: BlockPlan,
    vectors: Vec<Arc<[f64]>>,
    seed: u64,
}

/// Block scheme: draw h vectors from the Bernoulli ensemble (independent
/// entries +-1/sqrt(n)) once at construction, then propose vector `b_s` for
/// every measurement in block s. Deterministic given `seed`.
pub fn bernoulli_block_scheme(
    n: usize,
    m: usize,
    h: usize,
    seed: u64,
) -> Result<BernoulliBlockScheme> {
    if n == 0 {
        return Err(Error::parameter("dimension n must be positive"));
    }
    let plan = BlockPlan::balanced(m, h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..h).map(|_| bernoulli_vector(n, &mut rng)).collect();
    Ok(BernoulliBlockScheme { n, plan, vectors, seed })
}

impl BernoulliBlockScheme {
    pub fn plan(&self) -> &BlockPlan {
        &self.plan
    }

    pub fn block_vectors(&self) -> &[Arc<[f64]>] {
        &self.vectors
    }
}

impl Strategy for BernoulliBlockScheme {
    fn dimension(&self) -> usize {
        self.n
    }

    fn propose(&self, history: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
        let i = history.len();
        (i < self.plan.m).then(|| self.vectors[self.plan.block_of(i)].clone())
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("bernoulli_block")
            .with("m", self.plan.m)
            .with("h", self.plan.h)
            .with("seed", self.seed)
    }
}

/// m i.i.d. Bernoulli-ensemble rows held fixed; the design matrix is
/// retrievable for the max-correlation detector.
#[derive(Debug, Clone)]
pub struct FixedBernoulliDesign {
    n: usize,
    rows: Vec<Arc<[f64]>>,
    seed: u64,
}

/// Fixed design: draw m Bernoulli-ensemble rows at construction and propose
/// them in order.
pub fn fixed_bernoulli_design(n: usize, m: usize, seed: u64) -> Result<FixedBernoulliDesign> {
    if n == 0 {
        return Err(Error::parameter("dimension n must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..m).map(|_| bernoulli_vector(n, &mut rng)).collect();
    Ok(FixedBernoulliDesign { n, rows, seed })
}

impl FixedBernoulliDesign {
    pub fn design_rows(&self) -> &[Arc<[f64]>] {
        &self.rows
    }
}

impl Strategy for FixedBernoulliDesign {
    fn dimension(&self) -> usize {
        self.n
    }

    fn propose(&self, history: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
        self.rows.get(history.len()).cloned()
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("fixed_bernoulli")
            .with("m", self.rows.len())
            .with("seed", self.seed)
    }
}

/// Spends the whole energy budget on one constant measurement.
#[derive(Debug, Clone)]
pub struct EnergyConstantScheme {
    n: usize,
    m: f64,
    vector: Arc<[f64]>,
}

/// One measurement with the constant vector `sqrt(m/n) * ones`, which has
/// squared norm exactly m; requires an energy budget of at least m.
pub fn energy_constant_scheme(n: usize, m: f64) -> Result<EnergyConstantScheme> {
    if n == 0 {
        return Err(Error::parameter("dimension n must be positive"));
    }
    if !(m > 0.0) {
        return Err(Error::parameter(format!("energy {m} must be positive")));
    }
    Ok(EnergyConstantScheme { n, m, vector: constant_vector(n, (m / n as f64).sqrt()) })
}

impl Strategy for EnergyConstantScheme {
    fn dimension(&self) -> usize {
        self.n
    }

    fn propose(&self, history: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
        history.is_empty().then(|| self.vector.clone())
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("energy_constant").with("m", self.m)
    }
}

/// Measures every coordinate once with `sqrt(m/n) e_j`, reproducing the
/// classical normal-mean observations `y_j = x_j + sqrt(n/m) z_j` after
/// rescaling. Total energy is exactly m.
#[derive(Debug, Clone)]
pub struct CoordinateScheme {
    n: usize,
    m: f64,
    scale: f64,
}

pub fn coordinate_scheme(n: usize, m: f64) -> Result<CoordinateScheme> {
    if n == 0 {
        return Err(Error::parameter("dimension n must be positive"));
    }
    if !(m > 0.0) {
        return Err(Error::parameter(format!("energy {m} must be positive")));
    }
    Ok(CoordinateScheme { n, m, scale: (m / n as f64).sqrt() })
}

impl Strategy for CoordinateScheme {
    fn dimension(&self) -> usize {
        self.n
    }

    fn propose(&self, history: &Transcript, _: &BudgetRemaining) -> Option<Arc<[f64]>> {
        let j = history.len();
        (j < self.n).then(|| {
            let mut v = vec![0.0; self.n];
            v[j] = self.scale;
            Arc::from(v.into_boxed_slice())
        })
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("coordinate").with("m", self.m)
    }
}

/// Whether ensemble-based schemes redraw their random vectors per trial or
/// hold one realization fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleMode {
    /// Fresh ensemble per trial; matches risk statements averaged over the
    /// ensemble.
    Redraw,
    /// One fixed realization, reused across all trials.
    FixedSeed(u64),
}

impl EnsembleMode {
    pub fn label(&self) -> String {
        match self {
            EnsembleMode::Redraw => "redraw".to_string(),
            EnsembleMode::FixedSeed(s) => format!("fixed_seed:{s}"),
        }
    }
}

/// Any of the implemented schemes, instantiated.
#[derive(Debug, Clone)]
pub enum Scheme {
    Constant(ConstantScheme),
    BernoulliBlock(BernoulliBlockScheme),
    FixedBernoulli(FixedBernoulliDesign),
    EnergyConstant(EnergyConstantScheme),
    Coordinate(CoordinateScheme),
}

impl Scheme {
    /// The block partition, for schemes that have one.
    pub fn block_plan(&self) -> Option<&BlockPlan> {
        match self {
            Scheme::BernoulliBlock(s) => Some(s.plan()),
            _ => None,
        }
    }

    /// The fixed design rows, for schemes that expose one.
    pub fn design_rows(&self) -> Option<&[Arc<[f64]>]> {
        match self {
            Scheme::FixedBernoulli(s) => Some(s.design_rows()),
            _ => None,
        }
    }

    fn inner(&self) -> &dyn Strategy {
        match self {
            Scheme::Constant(s) => s,
            Scheme::BernoulliBlock(s) => s,
            Scheme::FixedBernoulli(s) => s,
            Scheme::EnergyConstant(s) => s,
            Scheme::Coordinate(s) => s,
        }
    }
}

impl Strategy for Scheme {
    fn dimension(&self) -> usize {
        self.inner().dimension()
    }

    fn propose(&self, history: &Transcript, remaining: &BudgetRemaining) -> Option<Arc<[f64]>> {
        self.inner().propose(history, remaining)
    }

    fn descriptor(&self) -> Descriptor {
        self.inner().descriptor()
    }
}

/// Serializable description of a scheme, instantiated per trial by the risk
/// machinery.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    Constant,
    BernoulliBlock { h: Option<usize> },
    FixedBernoulli,
    EnergyConstant,
    Coordinate,
}

impl SchemeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeSpec::Constant => "constant",
            SchemeSpec::BernoulliBlock { .. } => "bernoulli_block",
            SchemeSpec::FixedBernoulli => "fixed_bernoulli",
            SchemeSpec::EnergyConstant => "energy_constant",
            SchemeSpec::Coordinate => "coordinate",
        }
    }

    /// True when the scheme consumes its seed (so redraw changes anything).
    pub fn is_randomized(&self) -> bool {
        matches!(self, SchemeSpec::BernoulliBlock { .. } | SchemeSpec::FixedBernoulli)
    }

    /// Instantiate under `budget`. Count-budget schemes take the budget's m
    /// as their measurement count; energy-budget schemes take its energy.
    pub fn instantiate(&self, n: usize, budget: &Budget, seed: u64) -> Result<Scheme> {
        match (self, budget) {
            (SchemeSpec::Constant, Budget::Count { m }) => {
                Ok(Scheme::Constant(constant_scheme(n, *m as usize)?))
            }
            (SchemeSpec::BernoulliBlock { h }, Budget::Count { m }) => {
                let m = *m as usize;
                let h = h.unwrap_or_else(|| default_block_count(m));
                Ok(Scheme::BernoulliBlock(bernoulli_block_scheme(n, m, h, seed)?))
            }
            (SchemeSpec::FixedBernoulli, Budget::Count { m }) => {
                Ok(Scheme::FixedBernoulli(fixed_bernoulli_design(n, *m as usize, seed)?))
            }
            (SchemeSpec::EnergyConstant, Budget::Energy { m }) => {
                Ok(Scheme::EnergyConstant(energy_constant_scheme(n, *m)?))
            }
            (SchemeSpec::Coordinate, Budget::Energy { m }) => {
                Ok(Scheme::Coordinate(coordinate_scheme(n, *m)?))
            }
            (spec, budget) => Err(Error::parameter(format!(
                "scheme {} is incompatible with a {} budget",
                spec.name(),
                budget.mode_name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{run_session, squared_norm, Budget, BUDGET_SLACK};
    use approx::assert_abs_diff_eq;
    use std::collections::HashMap;

    fn no_budget() -> BudgetRemaining {
        BudgetRemaining { measurements: Some(u64::MAX), energy: None }
    }

    #[test]
    fn constant_proposals_have_unit_norm_and_right_entries() {
        let s = constant_scheme(4, 2).unwrap();
        let t = Transcript::new(4);
        let v = s.propose(&t, &no_budget()).unwrap();
        assert_eq!(v.as_ref(), &[0.5, 0.5, 0.5, 0.5]);
        for n in [2usize, 3, 7, 100] {
            let s = constant_scheme(n, 1).unwrap();
            let v = s.propose(&Transcript::new(n), &no_budget()).unwrap();
            assert_abs_diff_eq!(squared_norm(&v), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_with_zero_budget_declines_immediately() {
        let s = constant_scheme(4, 0).unwrap();
        assert!(s.propose(&Transcript::new(4), &no_budget()).is_none());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let t = run_session(&s, &[0.0; 4], &Budget::count(5), &mut rng).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn block_plan_is_balanced() {
        let plan = BlockPlan::balanced(6, 4).unwrap();
        assert_eq!(plan.sizes, vec![2, 2, 1, 1]);
        assert!(BlockPlan::balanced(3, 4).is_err());
        assert!(BlockPlan::balanced(4, 0).is_err());
    }

    #[test]
    fn default_block_count_grows_slowly() {
        assert_eq!(default_block_count(6), 4);
        assert_eq!(default_block_count(100), 7);
        assert_eq!(default_block_count(10_000), 14);
        // Clamped so h never exceeds m.
        assert_eq!(default_block_count(2), 2);
        assert_eq!(default_block_count(1), 1);
    }

    #[test]
    fn bernoulli_vectors_have_exactly_unit_norm() {
        for n in [1usize, 2, 63, 64, 65, 1000] {
            let s = bernoulli_block_scheme(n, 4, 2, 7).unwrap();
            for v in s.block_vectors() {
                assert_abs_diff_eq!(squared_norm(v), 1.0, epsilon = 1e-12);
                let scale = 1.0 / (n as f64).sqrt();
                assert!(v.iter().all(|&e| e == scale || e == -scale));
            }
        }
    }

    #[test]
    fn bernoulli_sign_patterns_are_uniform_for_n_two() {
        let mut counts: HashMap<(i8, i8), u64> = HashMap::new();
        let constructions = 100_000;
        for seed in 0..constructions {
            let s = bernoulli_block_scheme(2, 1, 1, seed).unwrap();
            let v = &s.block_vectors()[0];
            *counts.entry((v[0].signum() as i8, v[1].signum() as i8)).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for (_, c) in counts {
            assert_abs_diff_eq!(c as f64 / constructions as f64, 0.25, epsilon = 0.01);
        }
    }

    #[test]
    fn block_scheme_reuses_one_vector_per_block() {
        let s = bernoulli_block_scheme(8, 6, 4, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let t = run_session(&s, &[0.0; 8], &Budget::count(6), &mut rng).unwrap();
        assert_eq!(t.len(), 6);
        let plan = s.plan();
        for (i, e) in t.entries().iter().enumerate() {
            assert!(Arc::ptr_eq(&e.vector, &s.block_vectors()[plan.block_of(i)]));
        }
    }

    #[test]
    fn block_scheme_rejects_h_above_m() {
        assert!(bernoulli_block_scheme(4, 3, 5, 0).is_err());
    }

    #[test]
    fn fixed_design_is_reproducible_and_well_shaped() {
        let a = fixed_bernoulli_design(50, 10, 99).unwrap();
        let b = fixed_bernoulli_design(50, 10, 99).unwrap();
        assert_eq!(a.design_rows().len(), 10);
        let scale = 1.0 / 50f64.sqrt();
        for (ra, rb) in a.design_rows().iter().zip(b.design_rows()) {
            assert_eq!(ra.len(), 50);
            assert_eq!(ra.as_ref(), rb.as_ref());
            assert!(ra.iter().all(|&e| e == scale || e == -scale));
        }
        // Distinct rows: collision probability 2^-50 per pair.
        for i in 0..10 {
            for j in (i + 1)..10 {
                assert_ne!(a.design_rows()[i].as_ref(), a.design_rows()[j].as_ref());
            }
        }
    }

    #[test]
    fn energy_constant_proposes_once_with_energy_m() {
        let s = energy_constant_scheme(4, 2.0).unwrap();
        let v = s.propose(&Transcript::new(4), &no_budget()).unwrap();
        assert_abs_diff_eq!(squared_norm(&v), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0], 0.5f64.sqrt(), epsilon = 1e-15);
        // m = 1: the vector is ones/sqrt(n), norm 1, valid under count mode.
        let s = energy_constant_scheme(4, 1.0).unwrap();
        let v = s.propose(&Transcript::new(4), &no_budget()).unwrap();
        assert_abs_diff_eq!(squared_norm(&v), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let t = run_session(&s, &[0.0; 4], &Budget::count(1), &mut rng).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn energy_constant_violates_count_budget_when_oversized() {
        let s = energy_constant_scheme(4, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let err = run_session(&s, &[0.0; 4], &Budget::count(3), &mut rng).unwrap_err();
        assert!(matches!(err, crate::error::Error::BudgetViolation { index: 0, .. }));
    }

    #[test]
    fn coordinate_scheme_spends_exactly_the_energy_budget() {
        let s = coordinate_scheme(5, 2.5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        let t = run_session(&s, &[0.0; 5], &Budget::energy(2.5), &mut rng).unwrap();
        assert_eq!(t.len(), 5);
        assert!((t.energy_used() - 2.5).abs() <= BUDGET_SLACK);
    }

    #[test]
    fn schemes_ignore_history_responses() {
        // Proposals must be unchanged under arbitrary perturbation of the
        // observed responses.
        let schemes: Vec<Box<dyn Strategy>> = vec![
            Box::new(constant_scheme(4, 5).unwrap()),
            Box::new(bernoulli_block_scheme(4, 5, 2, 11).unwrap()),
            Box::new(fixed_bernoulli_design(4, 5, 11).unwrap()),
            Box::new(energy_constant_scheme(4, 2.0).unwrap()),
            Box::new(coordinate_scheme(4, 2.0).unwrap()),
        ];
        for s in &schemes {
            let mut clean = Transcript::new(4);
            let mut shuffled = Transcript::new(4);
            for step in 0..4 {
                let a = s.propose(&clean, &no_budget());
                let b = s.propose(&shuffled, &no_budget());
                match (&a, &b) {
                    (Some(va), Some(vb)) => assert_eq!(va.as_ref(), vb.as_ref()),
                    (None, None) => break,
                    _ => panic!("proposals diverged under response perturbation"),
                }
                let v = a.unwrap();
                clean = append(clean, v.clone(), step as f64);
                shuffled = append(shuffled, v, -3.0 * step as f64 + 1.0);
            }
        }
    }

    fn append(t: Transcript, vector: Arc<[f64]>, response: f64) -> Transcript {
        let mut entries: Vec<crate::model::Entry> = t.entries().to_vec();
        entries.push(crate::model::Entry { vector, response });
        Transcript::from_entries(t.dimension(), entries).unwrap()
    }

    #[test]
    fn scheme_spec_instantiation_respects_budget_modes() {
        let spec = SchemeSpec::Constant;
        assert!(spec.instantiate(4, &Budget::count(3), 0).is_ok());
        assert!(spec.instantiate(4, &Budget::energy(3.0), 0).is_err());
        let spec = SchemeSpec::EnergyConstant;
        assert!(spec.instantiate(4, &Budget::energy(3.0), 0).is_ok());
        assert!(spec.instantiate(4, &Budget::count(3), 0).is_err());
    }
}
