use proptest::prelude::*;

use stdmap_core::geometry::{cone_contains, critical_intervals, f_dot, in_strip, Cone};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cone_membership_is_scale_invariant(
        xi in 1e-3f64..10.0,
        u in -10.0f64..10.0,
        w in -10.0f64..10.0,
        lambda in prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6],
    ) {
        prop_assume!(u != 0.0 || w != 0.0);
        let c = Cone { xi };
        prop_assert_eq!(
            cone_contains(c, [u, w]).unwrap(),
            cone_contains(c, [lambda * u, lambda * w]).unwrap()
        );
    }

    #[test]
    fn strips_are_nested_in_eta(l in 1e3f64..1e8, e1 in 0.05f64..0.9, e2 in 0.05f64..0.9) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let small = critical_intervals(l, lo).unwrap();
        let big = critical_intervals(l, hi).unwrap();
        for k in 0..2 {
            let (a, b) = small.intervals[k];
            let (c, d) = big.intervals[k];
            prop_assert!(c <= a && b <= d, "{:?} not inside {:?}", small.intervals[k], big.intervals[k]);
        }
    }

    #[test]
    fn strip_membership_matches_the_defining_inequality(l in 1e3f64..1e8, eta in 0.05f64..0.9, x in 0.0f64..1.0) {
        let s = critical_intervals(l, eta).unwrap();
        prop_assert!(s.contains(0.25) && s.intervals[0].1 < s.intervals[1].0 && s.contains(0.75));
        // the endpoints are roots to 1e-14, so points within that of an endpoint may go either way
        let near = s.intervals.iter().any(|&(a, b)| (x - a).abs() < 1e-12 || (x - b).abs() < 1e-12);
        prop_assume!(!near);
        prop_assert_eq!(s.contains(x), in_strip(x, &s));
        prop_assert_eq!(s.contains(x), f_dot(x, l).abs() <= 2.0 * l.powf(eta));
    }

    #[test]
    fn strip_length_is_of_order_l_to_eta_minus_one(l in 1e3f64..1e9, eta in 0.1f64..0.75) {
        let s = critical_intervals(l, eta).unwrap();
        for (a, b) in s.intervals {
            let ratio = (b - a) / l.powf(eta - 1.0);
            prop_assert!((0.1..=10.0).contains(&ratio), "ratio {ratio}");
        }
    }
}
