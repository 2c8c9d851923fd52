//! Property tests for the set, procedure and closure invariants.

use proptest::prelude::*;
use std::collections::BTreeSet;

use triadic::closure::{
    closed_test, counterexample_procedure, enumerate_intersections, local_test, LocalTestRule,
    Side,
};
use triadic::family::{partition_from_decisions, Decision, DecisionVector, HypothesisFamily,
    PValuePair};
use triadic::models::{nested_pvalues, NestedNormalModel};
use triadic::normal::std_normal_quantile;
use triadic::procedures::{bauer_bonferroni, calibrate, single_step, CalibrationKind};

fn decision_strategy() -> impl Strategy<Value = Decision> {
    prop_oneof![
        Just(Decision::SignificantlyTrue),
        Just(Decision::SignificantlyFalse),
        Just(Decision::Uncertain),
    ]
}

fn complementary_family(p_h: &[f64]) -> HypothesisFamily {
    let pairs = p_h
        .iter()
        .map(|&p| PValuePair::complementary(p).unwrap())
        .collect();
    HypothesisFamily::free_combination(pairs).unwrap()
}

proptest! {
    /// U-bar, L and G are disjoint and, with L contained in U, cover all
    /// indices; U and L always complement U-bar and L-bar.
    #[test]
    fn partition_invariants(decisions in prop::collection::vec(decision_strategy(), 1..40)) {
        let d = DecisionVector::new(decisions);
        let p = partition_from_decisions(&d);
        let m = d.len();
        prop_assert_eq!(p.u().intersection(p.u_bar()).count(), 0);
        prop_assert_eq!(p.u().len() + p.u_bar().len(), m);
        prop_assert_eq!(p.l().intersection(p.l_bar()).count(), 0);
        prop_assert_eq!(p.l().len() + p.l_bar().len(), m);
        let g: BTreeSet<usize> = p.u().difference(p.l()).copied().collect();
        prop_assert_eq!(p.g(), &g);
        prop_assert!(p.is_coherent());
        let mut union: BTreeSet<usize> = p.u_bar().clone();
        union.extend(p.l());
        union.extend(p.g());
        prop_assert_eq!(union.len(), m);
    }

    /// With complementary pairs and a symmetric threshold tau <= 1/2,
    /// every rejected alternative has an accepted hypothesis.
    #[test]
    fn inclusion_holds_below_half(
        p_h in prop::collection::vec(0.0..1.0f64, 1..20),
        tau in 1e-6..=0.5f64,
    ) {
        let family = complementary_family(&p_h);
        let mut l = BTreeSet::new();
        let mut u = BTreeSet::new();
        for (i, pair) in family.pairs().iter().enumerate() {
            if pair.p_k() < tau {
                l.insert(i);
            }
            if pair.p_h() >= tau {
                u.insert(i);
            }
        }
        prop_assert!(l.is_subset(&u));
    }

    /// The three-decision rule and the Bonferroni partition agree away from
    /// the threshold boundaries.
    #[test]
    fn single_step_matches_bonferroni_partition(
        p_h in prop::collection::vec(0.0..1.0f64, 1..12),
        alpha in 0.005..0.4f64,
    ) {
        let m = p_h.len();
        let threshold = alpha / m as f64;
        for &p in &p_h {
            prop_assume!((p - threshold).abs() > 1e-9);
            prop_assume!((p - (1.0 - threshold)).abs() > 1e-9);
        }
        let family = complementary_family(&p_h);
        let thresholds = calibrate(CalibrationKind::Bonferroni, alpha, m).unwrap();
        let d = single_step(&family, &thresholds).unwrap();
        prop_assert_eq!(
            partition_from_decisions(&d),
            bauer_bonferroni(&family, alpha).unwrap()
        );
    }

    /// Shrinking alpha shrinks both significant sets and grows G.
    #[test]
    fn uncertainty_zone_grows_as_alpha_shrinks(
        p_h in prop::collection::vec(0.0..1.0f64, 1..12),
        alpha in 0.01..0.4f64,
        shrink in 0.05..0.95f64,
    ) {
        let family = complementary_family(&p_h);
        let tight = bauer_bonferroni(&family, alpha * shrink).unwrap();
        let loose = bauer_bonferroni(&family, alpha).unwrap();
        prop_assert!(tight.u_bar().is_subset(loose.u_bar()));
        prop_assert!(tight.l().is_subset(loose.l()));
        prop_assert!(loose.g().is_subset(tight.g()));
    }

    /// alpha/M never exceeds the exact independent calibration, so the
    /// independent rule never leaves a larger uncertainty zone.
    #[test]
    fn bonferroni_is_the_conservative_calibration(
        alpha in 0.001..0.999f64,
        m in 1usize..60,
    ) {
        let bonferroni = CalibrationKind::Bonferroni.per_test_level(alpha, m);
        let exact = CalibrationKind::IndependentExact.per_test_level(alpha, m);
        prop_assert!(bonferroni <= exact + 1e-15);
        if m == 1 {
            prop_assert!((bonferroni - exact).abs() < 1e-12);
        }
        let bonferroni_3 = calibrate(CalibrationKind::Bonferroni, alpha, 3);
        let exact_3 = calibrate(CalibrationKind::IndependentExact, alpha, 3);
        if let (Ok(t_b), Ok(t_e)) = (bonferroni_3, exact_3) {
            let p_h = [0.2, 0.011, 0.93];
            let family = complementary_family(&p_h);
            let d_b = single_step(&family, &t_b).unwrap();
            let d_e = single_step(&family, &t_e).unwrap();
            prop_assert!(d_e.uncertain_count() <= d_b.uncertain_count());
        }
    }

    /// The mask-based closure engine agrees with a naive re-derivation from
    /// the enumeration and the set-based local test.
    #[test]
    fn closure_engine_matches_naive_route(
        p_h in prop::collection::vec(0.0..1.0f64, 1..5),
        alpha in 0.01..0.45f64,
    ) {
        let family = complementary_family(&p_h);
        let rule = LocalTestRule::bonferroni(alpha).unwrap();
        let engine_decisions = closed_test(&family, &rule).unwrap();
        for i in 0..family.m() {
            let h_rejected = enumerate_intersections(&family, Some((i, Side::Hypothesis)))
                .unwrap()
                .iter()
                .all(|inter| local_test(inter, &family, &rule));
            let k_rejected = enumerate_intersections(&family, Some((i, Side::Alternative)))
                .unwrap()
                .iter()
                .all(|inter| local_test(inter, &family, &rule));
            let expected = match (h_rejected, k_rejected) {
                (true, false) => Decision::SignificantlyFalse,
                (false, true) => Decision::SignificantlyTrue,
                (false, false) => Decision::Uncertain,
                (true, true) => unreachable!("complementary pairs, schedule below 1/2"),
            };
            prop_assert_eq!(engine_decisions.get(i), expected);
        }
    }

    /// Consonance: an accepted intersection shields every claim it contains.
    #[test]
    fn accepted_intersections_shield_their_members(
        p_h in prop::collection::vec(0.0..1.0f64, 1..5),
        alpha in 0.01..0.45f64,
    ) {
        let family = complementary_family(&p_h);
        let rule = LocalTestRule::bonferroni(alpha).unwrap();
        let decisions = closed_test(&family, &rule).unwrap();
        for inter in enumerate_intersections(&family, None).unwrap() {
            if !local_test(&inter, &family, &rule) {
                for &i in inter.j1() {
                    prop_assert_ne!(decisions.get(i), Decision::SignificantlyFalse);
                }
                for &j in inter.j2() {
                    prop_assert_ne!(decisions.get(j), Decision::SignificantlyTrue);
                }
            }
        }
    }

    /// The inner p-value of the nested model never exceeds the outer one,
    /// and both pairs stay complementary.
    #[test]
    fn nested_pvalues_are_ordered(
        theta1 in -3.0..3.0f64,
        gap in 0.001..6.0f64,
        n in 1u64..50,
        xbar in -12.0..12.0f64,
    ) {
        let model = NestedNormalModel::new(0.0, n, theta1, theta1 + gap).unwrap();
        let [p1, p2] = nested_pvalues(&model, xbar);
        prop_assert!(p2.p_h() <= p1.p_h());
        prop_assert!(p1.is_complementary() && p2.is_complementary());
    }

    /// The nested closure procedure never claims theta < theta1 and
    /// theta >= theta2 at once, and inside the narrow-gap regime it never
    /// pairs a significant-truth claim at couple 1 with a rejection at
    /// couple 2.
    #[test]
    fn nested_closure_is_coherent(
        theta1 in -3.0..3.0f64,
        gap in 0.01..5.0f64,
        n in 1u64..17,
        alpha in 0.01..0.49f64,
        xbar in -10.0..10.0f64,
    ) {
        let theta2 = theta1 + gap;
        let d = counterexample_procedure(xbar, n, theta1, theta2, alpha).unwrap();
        // contradictory parameter claims can never co-occur
        prop_assert!(!(d.get(0) == Decision::SignificantlyFalse
            && d.get(1) == Decision::SignificantlyTrue));
        let c_alpha = std_normal_quantile(1.0 - alpha).unwrap();
        if (n as f64).sqrt() * gap <= 2.0 * c_alpha {
            prop_assert!(!(d.get(0) == Decision::SignificantlyTrue
                && d.get(1) == Decision::SignificantlyFalse));
        }
    }
}
