use proptest::collection::vec;
use proptest::prelude::*;

use stdmap_core::numerics::{frac, pairwise_sum, CompensatedSum};
use stdmap_core::stats::{gaussian_cdf, ks_statistic, Observable, SampleSummary};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ks_lies_in_the_unit_interval(samples in vec(-50.0f64..50.0, 1..200), var in 0.01f64..10.0) {
        let ks = ks_statistic(&samples, |x| gaussian_cdf(x, 0.0, var)).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
    }

    #[test]
    fn summary_variance_is_nonnegative(samples in vec(-1e3f64..1e3, 1..200)) {
        let s = SampleSummary::from_samples(&samples, 1.0).unwrap();
        prop_assert!(s.variance >= 0.0);
        prop_assert!((0.0..=1.0).contains(&s.ks));
        prop_assert_eq!(s.m, samples.len());
    }

    #[test]
    fn gaussian_cdf_is_monotone(a in -40.0f64..40.0, b in -40.0f64..40.0, var in 1e-3f64..1e3) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (p, q) = (gaussian_cdf(lo, 0.0, var), gaussian_cdf(hi, 0.0, var));
        prop_assert!((0.0..=1.0).contains(&p) && p <= q);
        prop_assert!((p + gaussian_cdf(-lo, 0.0, var) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn frac_lands_in_the_unit_interval(x in -1e15f64..1e15) {
        let r = frac(x);
        prop_assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn compensated_and_pairwise_sums_agree(values in vec(-1e6f64..1e6, 0..500)) {
        let mut c = CompensatedSum::new();
        for &v in &values {
            c.add(v);
        }
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((c.value() - pairwise_sum(&values)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn fourier_modes_are_periodic(k in 1u32..50, x in 0.0f64..1.0, shift in -20i32..20) {
        let phi = Observable::fourier(k);
        prop_assert!((phi.eval(x) - phi.eval(x + shift as f64)).abs() <= 1e-9);
        prop_assert!(phi.eval(x).abs() <= 1.0);
    }
}
