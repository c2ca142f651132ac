use proptest::prelude::*;

use trapmeasure_core::cantor::{cantor_measure_closed, partial_cantor, DigitSetSpec};
use trapmeasure_core::exact::{int, rat, to_f64};
use trapmeasure_core::gasket::{favard, projection_measure, GasketSpec};
use trapmeasure_core::permutations::Permutation;
use trapmeasure_core::trapezoid::{area, area_oracle, slice, TrapezoidSpec};
use trapmeasure_core::{Interval, IntervalUnion, PiecewiseLinearProfile, Rational};

fn perm(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n)
        .prop_flat_map(|n| Just((1..=n).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|image| Permutation::new(image).unwrap())
}

/// Intervals with endpoints on the grid k/12, k in 0..=48.
fn grid_intervals() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((0i64..48, 0i64..=12), 0..12).prop_map(|v| {
        v.into_iter()
            .map(|(lo, w)| (lo, (lo + w).min(48)))
            .collect()
    })
}

fn union_of(pairs: &[(i64, i64)]) -> IntervalUnion {
    IntervalUnion::normalize(
        pairs
            .iter()
            .map(|&(a, b)| Interval::new(rat(a, 12), rat(b, 12)).unwrap())
            .collect(),
    )
}

/// Counts covered grid cells directly.
fn cell_measure(pairs: &[(i64, i64)]) -> Rational {
    let covered = (0..48)
        .filter(|&c| pairs.iter().any(|&(a, b)| a <= c && c < b))
        .count();
    rat(covered as i64, 12)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn normalize_matches_cell_count(pairs in grid_intervals()) {
        let u = union_of(&pairs);
        prop_assert_eq!(u.measure(), cell_measure(&pairs));
        for w in u.parts().windows(2) {
            prop_assert!(w[0].hi() < w[1].lo());
        }
    }

    #[test]
    fn union_is_monotone_and_subadditive(a in grid_intervals(), b in grid_intervals()) {
        let (ua, ub) = (union_of(&a), union_of(&b));
        let m = ua.union(&ub).measure();
        prop_assert!(m >= ua.measure() && m >= ub.measure());
        prop_assert!(m <= ua.measure() + ub.measure());
    }

    #[test]
    fn pointwise_max_dominates(
        a in prop::collection::vec(0i64..10, 2..6),
        b in prop::collection::vec(0i64..10, 2..6),
        probe in 0i64..=24,
    ) {
        let profile = |v: &[i64]| {
            let k = (v.len() - 1) as i64;
            PiecewiseLinearProfile::new(v.iter().enumerate().map(|(i, &x)| (rat(i as i64, k), int(x))).collect()).unwrap()
        };
        let (pa, pb) = (profile(&a), profile(&b));
        let m = pa.pointwise_max(&pb);
        let y = rat(probe, 24);
        let top = std::cmp::max(pa.eval(&y), pb.eval(&y));
        prop_assert_eq!(m.eval(&y), top);
        prop_assert!(m.integrate() >= pa.integrate() && m.integrate() >= pb.integrate());
    }

    #[test]
    fn slice_stays_in_unit_interval(sigma in perm(12), num in 0i64..=60) {
        let n = sigma.len() as i64;
        let u = slice(&TrapezoidSpec::new(sigma).unwrap(), &rat(num, 60)).unwrap();
        prop_assert!(u.within(&int(0), &int(1)));
        let m = u.measure();
        prop_assert!(m >= rat(1, n) && m <= int(1));
    }

    #[test]
    fn area_bounds(sigma in perm(40)) {
        let n = sigma.len() as i64;
        let a = area(&TrapezoidSpec::new(sigma).unwrap());
        prop_assert!(a >= rat(1, n) && a <= int(1));
    }

    #[test]
    fn area_invariant_under_symmetries(sigma in perm(5)) {
        let a = area(&TrapezoidSpec::new(sigma.clone()).unwrap());
        for other in [sigma.inverse(), sigma.mirrored(), sigma.inverse().mirrored()] {
            prop_assert_eq!(&area(&TrapezoidSpec::new(other).unwrap()), &a);
        }
    }

    #[test]
    fn area_matches_midpoint_oracle(sigma in perm(30)) {
        let spec = TrapezoidSpec::new(sigma).unwrap();
        let est = area_oracle(&spec, 4000).unwrap();
        prop_assert!((est - to_f64(&area(&spec))).abs() < 1e-3);
    }

    #[test]
    fn cantor_levels_nest((p, q) in (1i64..=6).prop_flat_map(|q| (0..=2 * q, Just(q))), depth in 0u32..5) {
        let t = rat(p, q);
        let outer = partial_cantor(&DigitSetSpec::cantor(depth, &t).unwrap()).unwrap();
        let inner = partial_cantor(&DigitSetSpec::cantor(depth + 1, &t).unwrap()).unwrap();
        prop_assert_eq!(outer.union(&inner), outer.clone());
        prop_assert!(inner.measure() >= cantor_measure_closed(&t).unwrap());
    }

    #[test]
    fn gasket_mirror_symmetry(depth in 0u32..4, theta in 0.0f64..std::f64::consts::FRAC_PI_2) {
        let spec = GasketSpec::new(depth).unwrap();
        let a = projection_measure(&spec, theta).unwrap();
        let b = projection_measure(&spec, std::f64::consts::FRAC_PI_2 - theta).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn gasket_projection_shrinks_with_depth(depth in 0u32..4, theta in 0.0f64..std::f64::consts::PI) {
        let coarse = projection_measure(&GasketSpec::new(depth).unwrap(), theta).unwrap();
        let fine = projection_measure(&GasketSpec::new(depth + 1).unwrap(), theta).unwrap();
        prop_assert!(fine <= coarse + 1e-12);
    }
}

#[test]
fn closed_form_case_split_for_small_denominators() {
    for q in 1i64..=50 {
        for p in 0i64..=2 * q {
            if num_gcd(p, q) != 1 {
                continue;
            }
            let t = rat(p, q);
            let expected = if (p + q) % 3 == 0 { rat(1, q) } else { int(0) };
            assert_eq!(cantor_measure_closed(&t).unwrap(), expected, "t = {t}");
        }
    }
}

#[test]
fn cantor_measures_decrease_toward_closed_form() {
    for t in [rat(1, 2), rat(2, 7), rat(1, 3), rat(2, 1), rat(5, 4)] {
        let closed = cantor_measure_closed(&t).unwrap();
        let measures: Vec<Rational> = (0..=8)
            .map(|d| {
                partial_cantor(&DigitSetSpec::cantor(d, &t).unwrap())
                    .unwrap()
                    .measure()
            })
            .collect();
        for w in measures.windows(2) {
            assert!(w[1] <= w[0], "t = {t}");
        }
        assert!(measures.last().unwrap() >= &closed, "t = {t}");
        assert!(
            measures.last().unwrap() < &measures[0] || measures[0] == closed,
            "t = {t}"
        );
    }
}

#[test]
fn favard_is_positive() {
    for depth in 0..=6 {
        assert!(favard(&GasketSpec::new(depth).unwrap(), 256).unwrap() > 0.0);
    }
}

#[test]
fn reversal_approaches_one_half() {
    let gaps: Vec<f64> = [2usize, 4, 8, 16, 32]
        .iter()
        .map(|&n| {
            to_f64(&area(
                &TrapezoidSpec::new(Permutation::reversal(n).unwrap()).unwrap(),
            )) - 0.5
        })
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1].abs() < w[0].abs());
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}
