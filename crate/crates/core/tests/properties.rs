//! Property tests of structural invariants.

use proptest::prelude::*;
use sparsedetect::{
    exact_lrt, realize_signal, run_session, trial_rng, Arm, BlockPlan, Budget, Prior, PriorKind,
    SchemeSpec, SignalSpec, Transcript, BUDGET_SLACK,
};

proptest! {
    #[test]
    fn balanced_block_plans_are_balanced(m in 1usize..200, h_raw in 1usize..32) {
        let h = h_raw.min(m);
        let plan = BlockPlan::balanced(m, h).unwrap();
        prop_assert_eq!(plan.sizes.len(), h);
        prop_assert_eq!(plan.sizes.iter().sum::<usize>(), m);
        let max = *plan.sizes.iter().max().unwrap();
        let min = *plan.sizes.iter().min().unwrap();
        prop_assert!(max - min <= 1);
        prop_assert!(min >= 1);
        // block_of is consistent with the size list.
        let mut counts = vec![0usize; h];
        for i in 0..m {
            counts[plan.block_of(i)] += 1;
        }
        prop_assert_eq!(counts, plan.sizes);
    }

    #[test]
    fn accepted_transcripts_always_respect_budgets(
        seed in 0u64..1000,
        n in 1usize..12,
        m in 1u64..12,
        energy_mode in proptest::bool::ANY,
    ) {
        let (scheme, budget) = if energy_mode {
            (SchemeSpec::Coordinate, Budget::energy(m as f64))
        } else {
            (SchemeSpec::BernoulliBlock { h: Some((m as usize).min(3)) }, Budget::count(m))
        };
        let strategy = scheme.instantiate(n, &budget, seed).unwrap();
        let mut rng = trial_rng(seed, 0, Arm::Null);
        let x = vec![0.0; n];
        let t = run_session(&strategy, &x, &budget, &mut rng).unwrap();
        match budget {
            Budget::Count { m } => {
                prop_assert!(t.len() as u64 <= m);
                for v in t.vectors() {
                    let norm_sq: f64 = v.iter().map(|a| a * a).sum();
                    prop_assert!(norm_sq <= 1.0 + BUDGET_SLACK);
                }
            }
            Budget::Energy { m } => {
                prop_assert!(t.energy_used() <= m + BUDGET_SLACK);
            }
        }
    }

    #[test]
    fn realized_signals_are_members_of_their_class(
        seed in 0u64..500,
        n in 1usize..10,
        s_raw in 1usize..10,
        mu in 0.0f64..3.0,
        kind in 0usize..4,
    ) {
        let s = s_raw.min(n);
        let spec = match kind {
            0 => SignalSpec::nonneg_sparse(n, s, mu),
            1 => SignalSpec::signed_sparse(n, s, mu),
            2 => SignalSpec::interval(n, s, mu),
            _ => SignalSpec::interval_signed(n, s, mu),
        };
        let mut rng = trial_rng(seed, 1, Arm::Alternative);
        let x = realize_signal(&spec, &mut rng).unwrap();
        prop_assert_eq!(x.len(), n);
        let support: Vec<usize> = x.iter().enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect();
        if mu > 0.0 {
            prop_assert_eq!(support.len(), s);
        }
        for &j in &support {
            prop_assert!(x[j].abs() == mu);
            if kind == 0 || kind == 2 {
                prop_assert!(x[j] >= 0.0);
            }
        }
    }

    #[test]
    fn lrt_is_permutation_invariant(seed in 0u64..200) {
        use rand::seq::SliceRandom;
        let prior = Prior::new(PriorKind::NonnegUniform, 5, 2, 1.0);
        let budget = Budget::count(4);
        let strategy = SchemeSpec::FixedBernoulli.instantiate(5, &budget, seed).unwrap();
        let mut rng = trial_rng(seed, 2, Arm::Null);
        let t = run_session(&strategy, &[0.0; 5], &budget, &mut rng).unwrap();
        let (l, _) = exact_lrt(&t, &prior).unwrap();
        let mut entries = t.entries().to_vec();
        entries.shuffle(&mut rng);
        let shuffled = Transcript::from_entries(5, entries).unwrap();
        let (l2, _) = exact_lrt(&shuffled, &prior).unwrap();
        prop_assert!((l - l2).abs() <= 1e-10 * l.max(1.0));
    }

    #[test]
    fn bound_report_invariants_hold(m_budget in 0.1f64..50.0, mu in 0.0f64..2.0) {
        let prior = Prior::new(PriorKind::NonnegUniform, 8, 2, mu);
        let report = sparsedetect::kl_chain_closed_form(m_budget, &prior).unwrap();
        prop_assert!(report.kl_upper >= 0.0);
        prop_assert!((report.tv_upper - (report.kl_upper / 2.0).sqrt()).abs() <= 1e-12);
        let expected = (1.0 - (report.kl_upper / 8.0).sqrt()).max(0.0);
        prop_assert!((report.risk_lower - expected).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&report.risk_lower));
    }
}
