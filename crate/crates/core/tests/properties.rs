//! Property-based invariants across modules.

use proptest::prelude::*;

use nksim_core::data::{qoq_inflation, rebase, QuarterlySeries};
use nksim_core::expectations::{aggregate_expectation, switching_fractions, update_utility};
use nksim_core::filters::hp_filter;
use nksim_core::model::{compute_kappa, equation_residuals, solve_period, StructuralParams};
use nksim_core::quarter::Quarter;
use nksim_core::stats::{jb_p_value, mahalanobis, MahalanobisSpec};

fn finite(range: std::ops::Range<f64>) -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL.prop_map(move |x| {
        let span = range.end - range.start;
        range.start + (x.abs() % 1.0) * span
    })
}

proptest! {
    #[test]
    fn logit_fractions_partition_unity(
        u1 in -1e4..0.0f64,
        u2 in -1e4..0.0f64,
        gamma in 0.0..1e3f64,
        shift in -1e3..1e3f64,
    ) {
        let (a, b) = switching_fractions(u1, u2, gamma);
        prop_assert!((a + b - 1.0).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
        let (a2, _) = switching_fractions(u1 + shift, u2 + shift, gamma);
        prop_assert!((a - a2).abs() < 1e-11);
    }

    #[test]
    fn utilities_stay_nonpositive(
        err in -100.0..100.0f64,
        rho in 0.01..0.99f64,
        steps in 1usize..50,
    ) {
        let mut u = 0.0;
        for _ in 0..steps {
            u = update_utility(u, err, 0.0, rho);
            prop_assert!(u <= 0.0);
        }
    }

    #[test]
    fn aggregate_expectation_is_convex(
        alpha in 0.0..1.0f64,
        f1 in -50.0..50.0f64,
        f2 in -50.0..50.0f64,
    ) {
        let agg = aggregate_expectation(alpha, f1, f2);
        prop_assert!(agg >= f1.min(f2) - 1e-12);
        prop_assert!(agg <= f1.max(f2) + 1e-12);
    }

    #[test]
    fn period_solver_is_exact_and_linear(
        e_y in -5.0..5.0f64,
        e_pi in -5.0..5.0f64,
        eps in -5.0..5.0f64,
        eta in -5.0..5.0f64,
        i_prev in -5.0..5.0f64,
        scale in 0.1..3.0f64,
    ) {
        let p = StructuralParams::default();
        let kappa = compute_kappa(&p).unwrap();
        let s = solve_period(e_y, e_pi, eps, eta, i_prev, &p, kappa).unwrap();
        let r = equation_residuals(&s, e_y, e_pi, eps, eta, i_prev, &p, kappa);
        prop_assert!(r.iter().all(|v| v.abs() < 1e-10));
        // homogeneity
        let s2 = solve_period(
            scale * e_y, scale * e_pi, scale * eps, scale * eta, scale * i_prev, &p, kappa,
        ).unwrap();
        prop_assert!((s2.y - scale * s.y).abs() < 1e-9);
        prop_assert!((s2.pi - scale * s.pi).abs() < 1e-9);
    }

    #[test]
    fn hp_cycle_sums_to_zero_and_shifts_cancel(
        seed in 0u64..1000,
        shift in -10.0..10.0f64,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..40).map(|i| {
            10.0 + 0.01 * i as f64 + rng.gen_range(-0.05..0.05)
        }).collect();
        let (_, cycle) = hp_filter(&z, 1600.0).unwrap();
        prop_assert!(cycle.iter().sum::<f64>().abs() < 1e-8);
        let shifted: Vec<f64> = z.iter().map(|v| v + shift).collect();
        let (_, c2) = hp_filter(&shifted, 1600.0).unwrap();
        for (a, b) in cycle.iter().zip(&c2) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn two_obs_distance_is_zero_or_sqrt2(
        a0 in finite(-4.0..4.0), a1 in finite(-4.0..4.0),
        b0 in finite(-4.0..4.0), b1 in finite(-4.0..4.0),
    ) {
        let spec = MahalanobisSpec::default();
        let d = mahalanobis([a0, a1], [b0, b1], None, &spec).unwrap();
        let sep = ((a0 - b0).powi(2) + (a1 - b1).powi(2)).sqrt();
        if sep == 0.0 {
            prop_assert_eq!(d, 0.0);
        } else if sep > 1e-6 {
            prop_assert!((d - std::f64::consts::SQRT_2).abs() < 1e-9);
        }
    }

    #[test]
    fn jb_p_is_monotone(lo in 0.0..50.0f64, bump in 0.001..10.0f64) {
        prop_assert!(jb_p_value(lo + bump) < jb_p_value(lo));
    }

    #[test]
    fn rebase_then_inflation_matches_raw(
        seed in 0u64..500,
        anchor_idx in 0usize..12,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![80.0];
        for _ in 1..12 {
            let prev = *values.last().unwrap();
            values.push(prev * rng.gen_range(0.99..1.03));
        }
        let start: Quarter = "2010Q1".parse().unwrap();
        let s = QuarterlySeries::new("cpi", start, values);
        let anchor = start.offset(anchor_idx as i64 % 12);
        let direct = qoq_inflation(&s).unwrap();
        let via = qoq_inflation(&rebase(&s, anchor).unwrap()).unwrap();
        for (a, b) in direct.values.iter().zip(&via.values) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
