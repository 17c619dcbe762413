use proptest::prelude::*;

use stdmap_core::geometry::jacobian_hat_f;
use stdmap_core::maps::{
    conjugate, step_hat_f, step_shear, step_slowfast, step_standard, step_tilt, CylinderState, MapParams,
    TorusPoint,
};

/// Distance on the circle.
fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn in_unit(v: f64) -> bool {
    (0.0..1.0).contains(&v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn outputs_stay_in_the_unit_square(x in -1e6f64..1e6, y in -1e6f64..1e6, l in 1e-3f64..1e9) {
        let p = TorusPoint::wrap(x, y);
        prop_assert!(in_unit(p.x()) && in_unit(p.y()));
        for q in [step_hat_f(p, l), step_standard(p, l), conjugate(p)] {
            prop_assert!(in_unit(q.x()) && in_unit(q.y()), "{q:?}");
        }
    }

    #[test]
    fn conjugacy_intertwines_the_two_maps(x in 0.0f64..1.0, y in 0.0f64..1.0, l in 1e-2f64..1e6) {
        let p = TorusPoint::wrap(x, y);
        let lhs = conjugate(step_standard(p, l));
        let rhs = step_hat_f(conjugate(p), l);
        prop_assert!(circ(lhs.x(), rhs.x()) <= 1e-12);
        prop_assert!(circ(lhs.y(), rhs.y()) <= 1e-12);
    }

    #[test]
    fn jacobian_has_unit_determinant(x in 0.0f64..1.0, y in 0.0f64..1.0, l in 1e-2f64..1e9) {
        let det = jacobian_hat_f(TorusPoint::wrap(x, y), l).det();
        prop_assert!((det - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn slow_fast_step_is_shear_after_tilt(
        x in 0.0f64..1.0,
        z in -2.0f64..2.0,
        eps in 0.01f64..0.5,
        alpha in 0.25f64..3.0,
    ) {
        let params = MapParams::from_epsilon_alpha(eps, alpha).unwrap();
        prop_assume!(params.shear_factor().unwrap() < 1e6);
        let s = CylinderState::new(x, z).unwrap();
        let two = step_shear(step_tilt(s, &params).unwrap(), &params).unwrap();
        let one = step_slowfast(s, &params).unwrap();
        // the intermediate z is rounded to f64, and the shear multiplies that rounding by K
        let k = params.shear_factor().unwrap();
        let tol = 1e-12 + k * f64::EPSILON * (z.abs() + eps);
        prop_assert!(circ(two.x(), one.x()) <= tol, "{two:?} vs {one:?}");
        prop_assert!((two.z - one.z).abs() <= 1e-12);
    }

    #[test]
    fn derived_parameters(eps in 1e-4f64..0.99, alpha in 0.1f64..10.0) {
        let p = MapParams::from_epsilon_alpha(eps, alpha).unwrap();
        prop_assert!((p.l - eps.powf(-alpha)).abs() <= 1e-12 * p.l);
        prop_assert_eq!(p.beta, Some(2.0 / alpha));
        let n = p.l.powf(2.0 / alpha).floor();
        if n < u64::MAX as f64 {
            prop_assert_eq!(p.n_of_l, Some(n as u64));
        }
    }
}
