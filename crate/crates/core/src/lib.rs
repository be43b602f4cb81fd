//! Minimax detection of a sparse high-dimensional vector from noisy linear
//! measurements.
//!
//! The library implements the measurement channel `y_i = <a_i, x> + z_i`
//! under count and energy budgets, the constant-vector and Bernoulli-block
//! sensing schemes with their sum and block-energy tests, fixed-design
//! energy and max-correlation tests, the scan statistic for
//! interval-supported signals, closed-form information lower bounds through
//! the KL/Pinsker chain, an exact likelihood-ratio oracle for small
//! instances, and a reproducible parallel Monte Carlo harness for risk
//! estimation and threshold calibration.

pub mod bounds;
pub mod detectors;
pub mod error;
pub mod model;
pub mod rng;
pub mod risk;
pub mod schemes;
pub mod stats;

pub use bounds::{
    closed_form_operator_norm, kl_chain, kl_chain_closed_form, lower_bound_general,
    lower_bound_nonneg, operator_norm, prior_second_moment, tv_distance_estimate, BoundReport,
    SecondMomentMatrix, TvEstimate,
};
pub use detectors::{
    block_energy_test, block_energy_threshold, default_tau, exact_lrt, fixed_design_energy_test,
    max_correlation_test, scan_test, scan_theory_threshold, sum_test, sum_test_risk, theory_tau_m,
    DetectorSpec, Prior, PriorKind, TestOutcome,
};
pub use error::{Error, Result};
pub use model::{
    classic_observations, measure, realize_signal, run_session, Budget, BudgetRemaining, Entry,
    SignalKind, SignalSpec, Transcript, BUDGET_SLACK,
};
pub use rng::{trial_rng, Arm};
pub use risk::{
    calibrate_threshold, estimate_risk, estimate_risk_multi, sweep, GridCell, RiskEstimate,
    SweepRow, TrialPlan,
};
pub use schemes::{
    bernoulli_block_scheme, constant_scheme, coordinate_scheme, default_block_count,
    energy_constant_scheme, fixed_bernoulli_design, BernoulliBlockScheme, BlockPlan,
    ConstantScheme, CoordinateScheme, Descriptor, EnergyConstantScheme, EnsembleMode,
    FixedBernoulliDesign, Scheme, SchemeSpec, Strategy,
};
