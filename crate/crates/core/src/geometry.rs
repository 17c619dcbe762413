//! Critical strips, cone fields and the tangent map of `hat F`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::TorusPoint;
use crate::numerics::trig::sincos_2pi_dd;

/// Smallest `L` accepted by [`critical_intervals`] unless overridden.
pub const DEFAULT_L_MIN: f64 = 100.0;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("critical strips degenerate at L = {l}, eta = {eta}: {reason}")]
    StripDegenerate { l: f64, eta: f64, reason: String },
    #[error("cone membership is undefined for the zero vector")]
    ZeroVector,
    #[error("cone aperture out of domain: need xi <= L^eta and 2 L^eta > xi (xi = {xi}, L^eta = {l_eta})")]
    ApertureDomain { xi: f64, l_eta: f64 },
}

/// `fdot(x) = 2 + 2 pi L cos(2 pi x)`, the derivative of `f`.
#[inline]
pub fn f_dot(x: f64, l: f64) -> f64 {
    let c = sincos_2pi_dd(x).1;
    (c * (TWO_PI * l)).add_f64(2.0).to_f64()
}

/// `fddot(x) = -4 pi^2 L sin(2 pi x)`.
#[inline]
pub fn f_ddot(x: f64, l: f64) -> f64 {
    let s = sincos_2pi_dd(x).0.to_f64();
    -TWO_PI * TWO_PI * l * s
}

/// The set `S_eta = {|fdot(x)| <= 2 L^eta}` as two closed intervals, the
/// first around `1/4` and the second around `3/4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalStrips {
    pub l: f64,
    pub eta: f64,
    pub intervals: [(f64, f64); 2],
}

impl CriticalStrips {
    /// Half-width threshold `2 L^eta`.
    pub fn threshold(&self) -> f64 {
        2.0 * self.l.powf(self.eta)
    }

    pub fn total_measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Membership by interval containment, the counterpart of [`in_strip`].
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }
}

fn bisect_decreasing(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    // g(a) > 0 >= g(b); returns the final bracket
    while b - a > 1e-15 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    (a, b)
}

/// Locates the critical strips for `L >= 100`.
pub fn critical_intervals(l: f64, eta: f64) -> Result<CriticalStrips, GeometryError> {
    critical_intervals_with_min(l, eta, DEFAULT_L_MIN)
}

/// Locates the critical strips, with an explicit lower bound on `L`.
pub fn critical_intervals_with_min(l: f64, eta: f64, l_min: f64) -> Result<CriticalStrips, GeometryError> {
    let degenerate = |reason: String| GeometryError::StripDegenerate { l, eta, reason };
    if !(l.is_finite() && l >= l_min) {
        return Err(degenerate(format!("L must be at least L_min = {l_min}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(degenerate("eta must lie in (0, 1)".into()));
    }
    let t = 2.0 * l.powf(eta);
    if t >= TWO_PI * l - 2.0 {
        return Err(degenerate("2 L^eta >= 2 pi L - 2, the strips cover the circle".into()));
    }
    // fdot decreases on [0, 1/2]; the strip around 1/4 is {-t <= fdot <= t}
    let (_, lo) = bisect_decreasing(|x| f_dot(x, l) - t, 0.0, 0.25);
    let (hi, _) = bisect_decreasing(|x| f_dot(x, l) + t, 0.25, 0.5);
    Ok(CriticalStrips {
        l,
        eta,
        intervals: [(lo, hi), (1.0 - hi, 1.0 - lo)],
    })
}

/// `|2 + 2 pi L cos(2 pi x)| <= 2 L^eta`.
pub fn in_strip(x: f64, strips: &CriticalStrips) -> bool {
    f_dot(x, strips.l).abs() <= strips.threshold()
}

/// The cone `C_xi = {(u, w) : |w| <= xi |u|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub xi: f64,
}

pub fn cone_contains(cone: Cone, v: [f64; 2]) -> Result<bool, GeometryError> {
    if v[0] == 0.0 && v[1] == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    Ok(v[1].abs() <= cone.xi * v[0].abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentMatrix {
    pub m: [[f64; 2]; 2],
}

impl TangentMatrix {
    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.m;
        a * d - b * c
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.m;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }
}

/// Derivative of `hat F` at `p`: rows `(fdot(x), -1)` and `(1, 0)`.
pub fn jacobian_hat_f(p: TorusPoint, l: f64) -> TangentMatrix {
    TangentMatrix {
        m: [[f_dot(p.x(), l), -1.0], [1.0, 0.0]],
    }
}

/// `xi' = 1 / (2 L^eta - xi)`, the aperture of the image cone off `S_eta`.
pub fn pushed_cone_aperture(xi: f64, eta: f64, l: f64) -> Result<f64, GeometryError> {
    let l_eta = l.powf(eta);
    if !(xi > 0.0 && xi <= l_eta && 2.0 * l_eta > xi) {
        return Err(GeometryError::ApertureDomain { xi, l_eta });
    }
    Ok(1.0 / (2.0 * l_eta - xi))
}

/// Outcome of [`cone_invariance_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest `|slope| / xi'` among the image vectors.
    pub max_aperture_ratio: f64,
}

/// Draws `samples` triples of `L` (log-uniform in `l_range`), a point `p`
/// outside `S_eta` and a vector `v` in `C_xi`, and counts the images
/// `d hat F_p v` that leave `C_{xi'}` with `xi' = 1 / (2 L^eta - xi)`.
pub fn cone_invariance_check(
    samples: usize,
    l_range: (f64, f64),
    eta: f64,
    xi: f64,
    seed: u64,
) -> Result<ConeCheck, GeometryError> {
    use rand::Rng;
    let (lo, hi) = (l_range.0.ln(), l_range.1.ln());
    let (mut violations, mut worst) = (0, 0.0f64);
    for i in 0..samples as u64 {
        let mut rng = crate::stats::rng::sample_stream(seed, i);
        let l = (lo + (hi - lo) * rng.random::<f64>()).exp();
        let xi_out = pushed_cone_aperture(xi, eta, l)?;
        let threshold = 2.0 * l.powf(eta);
        let x = loop {
            let x = rng.random::<f64>();
            if f_dot(x, l).abs() > threshold {
                break x;
            }
        };
        let p = TorusPoint::wrap(x, rng.random::<f64>());
        let v = [1.0, xi * (2.0 * rng.random::<f64>() - 1.0)];
        let w = jacobian_hat_f(p, l).apply(v);
        worst = worst.max(w[1].abs() / (xi_out * w[0].abs()));
        if !cone_contains(Cone { xi: xi_out }, w)? {
            violations += 1;
        }
    }
    Ok(ConeCheck {
        samples,
        violations,
        max_aperture_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_solve_the_defining_equation() {
        let l = 1e4;
        let s = critical_intervals(l, 0.5).unwrap();
        for x in [s.intervals[0].0, s.intervals[0].1] {
            // independent evaluation with libm
            let fd = 2.0 + TWO_PI * l * (TWO_PI * x).cos();
            assert!((fd.abs() - 2.0 * l.sqrt()).abs() <= 1e-8, "x = {x}");
        }
    }

    #[test]
    fn quarter_points_are_inside() {
        let s = critical_intervals(1e3, 0.25).unwrap();
        assert!(s.contains(0.25) && s.contains(0.75));
        assert!(in_strip(0.25, &s));
        let s = critical_intervals(1e3, 0.5).unwrap();
        assert!(!in_strip(0.0, &s));
    }

    #[test]
    fn measure_at_ten_thousand() {
        let s = critical_intervals(1e4, 0.5).unwrap();
        let m = s.total_measure();
        assert!((1e-3..=1e-1).contains(&m), "{m}");
    }

    #[test]
    fn degenerate_strips_are_rejected() {
        assert!(matches!(critical_intervals(50.0, 0.5), Err(GeometryError::StripDegenerate { .. })));
        assert!(matches!(
            critical_intervals_with_min(0.5, 0.5, 0.1),
            Err(GeometryError::StripDegenerate { .. })
        ));
    }

    #[test]
    fn jacobian_examples() {
        let j = jacobian_hat_f(TorusPoint::new(0.25, 0.3).unwrap(), 123.0);
        assert_eq!(j.m, [[2.0, -1.0], [1.0, 0.0]]);
        let j = jacobian_hat_f(TorusPoint::new(0.0, 0.0).unwrap(), 10.0);
        assert!((j.m[0][0] - (2.0 + 20.0 * std::f64::consts::PI)).abs() < 1e-12);
        assert_eq!(j.det(), 1.0);
    }

    #[test]
    fn cone_examples() {
        let c = Cone { xi: 0.1 };
        assert!(cone_contains(c, [1.0, 0.0]).unwrap());
        assert!(!cone_contains(c, [0.0, 1.0]).unwrap());
        assert!(cone_contains(c, [1.0, 0.1]).unwrap());
        assert_eq!(cone_contains(c, [0.0, 0.0]), Err(GeometryError::ZeroVector));
    }

    #[test]
    fn cones_are_invariant_off_the_strips() {
        let c = cone_invariance_check(20_000, (1e3, 1e6), 0.25, 0.1, 5).unwrap();
        assert_eq!(c.violations, 0);
        assert!(c.max_aperture_ratio <= 1.0 && c.max_aperture_ratio > 0.5);
        assert_eq!(c.samples, 20_000);
    }

    #[test]
    fn aperture_example() {
        let xi = pushed_cone_aperture(0.1, 0.25, 1e4).unwrap();
        assert!((xi - 1.0 / 19.9).abs() < 1e-15);
        assert!(pushed_cone_aperture(20.0, 0.25, 1e4).is_err());
    }
}
