//! The map families: the standard map `F_L`, its sheared form `hat F`, the
//! lifted map `tilde F`, and the slow-fast map `G = S ∘ T` on the cylinder.
//!
//! Every kernel evaluates `L sin(2 pi x)` in double-double arithmetic and
//! reduces modulo one before rounding, so the fractional parts that feed the
//! next iterate stay accurate up to `L = 2^40`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::dd::DoubleDouble;
use crate::numerics::trig::{sin_2pi_dd, sin_2pi_of_dd};

/// Largest shear factor `epsilon^-(1+alpha)` for which raw `G` iteration is
/// carried out.
pub const SHEAR_LIMIT: f64 = 1_099_511_627_776.0; // 2^40

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("shear factor epsilon^-(1+alpha) = {shear:e} exceeds the precision limit 2^40")]
    PrecisionDomainExceeded { shear: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("initial state does not match the selected map ({0})")]
    StateMismatch(&'static str),
    #[error("slow-fast parameters (epsilon, alpha) are required for this map")]
    MissingSlowFast,
}

/// A point of the torus in the fundamental domain `[0, 1)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    /// Accepts coordinates already in `[0, 1)`.
    pub fn new(x: f64, y: f64) -> Result<Self, MapError> {
        if !(0.0..1.0).contains(&x) || !(0.0..1.0).contains(&y) {
            return Err(MapError::InvalidParameter(format!(
                "torus coordinates must lie in [0, 1), got ({x}, {y})"
            )));
        }
        Ok(TorusPoint { x, y })
    }

    /// Reduces arbitrary finite coordinates modulo one.
    pub fn wrap(x: f64, y: f64) -> Self {
        TorusPoint {
            x: crate::numerics::frac(x),
            y: crate::numerics::frac(y),
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    fn from_dd(x: DoubleDouble, y: DoubleDouble) -> Self {
        TorusPoint {
            x: x.to_unit_f64(),
            y: y.to_unit_f64(),
        }
    }
}

/// A point of `R x T^1`: unreduced horizontal coordinate, reduced vertical one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub x: f64,
    pub y: f64,
}

impl LiftedPoint {
    pub fn reduce(&self) -> TorusPoint {
        TorusPoint::wrap(self.x, self.y)
    }
}

impl From<TorusPoint> for LiftedPoint {
    fn from(p: TorusPoint) -> Self {
        LiftedPoint { x: p.x, y: p.y }
    }
}

/// Slow-fast state: fast angle `x in [0, 1)`, slow variable `z in R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderState {
    x: f64,
    pub z: f64,
}

impl CylinderState {
    pub fn new(x: f64, z: f64) -> Result<Self, MapError> {
        if !(0.0..1.0).contains(&x) || !z.is_finite() {
            return Err(MapError::InvalidParameter(format!(
                "cylinder state needs x in [0, 1) and finite z, got ({x}, {z})"
            )));
        }
        Ok(CylinderState { x, z })
    }

    pub fn wrap(x: f64, z: f64) -> Self {
        CylinderState {
            x: crate::numerics::frac(x),
            z,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Parameters of the map families.
///
/// Either `L` alone (standard map) or `(epsilon, alpha)` with the derived
/// `L = epsilon^-alpha`, `beta = 2/alpha`, `N(L) = floor(L^beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub l: f64,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n_of_l: Option<u64>,
    /// `epsilon^-(1+alpha) = L / epsilon`, carried so that `shear * epsilon`
    /// reproduces `L` to double-double accuracy.
    #[serde(skip)]
    shear: Option<DoubleDouble>,
}

impl MapParams {
    pub fn from_l(l: f64) -> Result<Self, MapError> {
        if !(l.is_finite() && l > 0.0) {
            return Err(MapError::InvalidParameter(format!("L must be positive and finite, got {l}")));
        }
        Ok(MapParams {
            l,
            epsilon: None,
            alpha: None,
            beta: None,
            n_of_l: None,
            shear: None,
        })
    }

    pub fn from_epsilon_alpha(epsilon: f64, alpha: f64) -> Result<Self, MapError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(MapError::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(MapError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let l = epsilon.powf(-alpha);
        if !l.is_finite() {
            return Err(MapError::InvalidParameter(format!(
                "L = epsilon^-alpha overflows for epsilon = {epsilon}, alpha = {alpha}"
            )));
        }
        let beta = 2.0 / alpha;
        let n_of_l = l.powf(beta).floor();
        Ok(MapParams {
            l,
            epsilon: Some(epsilon),
            alpha: Some(alpha),
            beta: Some(beta),
            n_of_l: (n_of_l < u64::MAX as f64).then_some(n_of_l as u64),
            shear: Some(DoubleDouble::from_f64(l).div_f64(epsilon)),
        })
    }

    /// `epsilon^-(1+alpha)` if the slow-fast parameters are set.
    pub fn shear_factor(&self) -> Option<f64> {
        self.shear.map(DoubleDouble::to_f64)
    }

    fn shear_dd(&self) -> Result<(DoubleDouble, f64), MapError> {
        match (self.shear, self.epsilon) {
            (Some(k), Some(eps)) => {
                if k.hi > SHEAR_LIMIT {
                    Err(MapError::PrecisionDomainExceeded { shear: k.hi })
                } else {
                    Ok((k, eps))
                }
            }
            _ => Err(MapError::MissingSlowFast),
        }
    }
}

/// `L sin(2 pi x)` in double-double.
#[inline]
fn kick(x: f64, l: f64) -> DoubleDouble {
    sin_2pi_dd(x) * l
}

/// `f(x) = 2x + L sin(2 pi x)` in double-double.
#[inline]
pub fn eval_f_dd(x: f64, l: f64) -> DoubleDouble {
    kick(x, l).add_f64(2.0 * x)
}

/// `f(x) = 2x + L sin(2 pi x)`, unreduced.
///
/// ```
/// use stdmap_core::maps::eval_f;
/// assert_eq!(eval_f(0.25, 10.0), 10.5);
/// assert_eq!(eval_f(0.5, 1e3), 1.0);
/// ```
pub fn eval_f(x: f64, l: f64) -> f64 {
    eval_f_dd(x, l).to_f64()
}

/// `f(x) mod 1`, accurate to about `1e-16` for `L <= 2^40`.
pub fn eval_f_frac(x: f64, l: f64) -> f64 {
    eval_f_dd(x, l).frac()
}

/// `hat F(x, y) = (f(x) - y mod 1, x)`.
pub fn step_hat_f(p: TorusPoint, l: f64) -> TorusPoint {
    let x = (eval_f_dd(p.x, l) - DoubleDouble::from_f64(p.y)).frac_dd();
    TorusPoint::from_dd(x, DoubleDouble::from_f64(p.x))
}

/// The Chirikov standard map `F_L(x, y) = (x + y + L sin 2 pi x, y + L sin 2 pi x) mod 1`.
pub fn step_standard(p: TorusPoint, l: f64) -> TorusPoint {
    let k = kick(p.x, l);
    let y = k.add_f64(p.y).frac_dd();
    let x = y.add_f64(p.x).frac_dd();
    TorusPoint::from_dd(x, y)
}

/// The coordinate change `(x, y) -> (x, x - y mod 1)`, an involution that
/// intertwines `F_L` and `hat F`.
pub fn conjugate(p: TorusPoint) -> TorusPoint {
    TorusPoint::from_dd(DoubleDouble::from_f64(p.x), DoubleDouble::from_sum(p.x, -p.y).frac_dd())
}

/// `tilde F(x, y) = (f(x) - y, x)` with the horizontal output left unreduced.
pub fn step_lifted(p: impl Into<LiftedPoint>, l: f64) -> LiftedPoint {
    let p = p.into();
    let x = crate::numerics::frac(p.x);
    LiftedPoint {
        x: (eval_f_dd(x, l) - DoubleDouble::from_f64(p.y)).to_f64(),
        y: x,
    }
}

/// The tilt `T(x, z) = (x, z + epsilon sin 2 pi x)`.
pub fn step_tilt(s: CylinderState, params: &MapParams) -> Result<CylinderState, MapError> {
    let (_, eps) = params.shear_dd()?;
    let z = (sin_2pi_dd(s.x) * eps).add_f64(s.z);
    Ok(CylinderState { x: s.x, z: z.to_f64() })
}

/// The shear `S(x, z) = (x + epsilon^-(1+alpha) z mod 1, z)`.
pub fn step_shear(s: CylinderState, params: &MapParams) -> Result<CylinderState, MapError> {
    let (k, _) = params.shear_dd()?;
    let x = (k * s.z).add_f64(s.x).frac_dd();
    Ok(CylinderState {
        x: x.to_unit_f64(),
        z: s.z,
    })
}

/// One step of `G = S ∘ T`.
pub fn step_slowfast(s: CylinderState, params: &MapParams) -> Result<CylinderState, MapError> {
    let (k, eps) = params.shear_dd()?;
    let (x, z) = slowfast_dd(DoubleDouble::from_f64(s.x), DoubleDouble::from_f64(s.z), k, eps);
    Ok(CylinderState {
        x: x.to_unit_f64(),
        z: z.to_f64(),
    })
}

#[inline]
fn slowfast_dd(x: DoubleDouble, z: DoubleDouble, k: DoubleDouble, eps: f64) -> (DoubleDouble, DoubleDouble) {
    let z = z + sin_2pi_of_dd(x) * eps;
    let x = (x + k * z).frac_dd();
    (x, z)
}

#[inline]
fn hat_f_dd(x: DoubleDouble, y: DoubleDouble, l: f64) -> (DoubleDouble, DoubleDouble) {
    let fx = sin_2pi_of_dd(x) * l + x * 2.0;
    ((fx - y).frac_dd(), x)
}

#[inline]
fn standard_dd(x: DoubleDouble, y: DoubleDouble, l: f64) -> (DoubleDouble, DoubleDouble) {
    let y = (y + sin_2pi_of_dd(x) * l).frac_dd();
    ((x + y).frac_dd(), y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    /// `hat F_L` on the torus.
    HatF,
    /// The standard map `F_L` on the torus.
    Standard,
    /// `G_epsilon` on the cylinder.
    SlowFast,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum State {
    Torus(TorusPoint),
    Cylinder(CylinderState),
}

impl State {
    pub fn x(&self) -> f64 {
        match self {
            State::Torus(p) => p.x,
            State::Cylinder(s) => s.x,
        }
    }

    /// The second coordinate: `y` on the torus, `z` on the cylinder.
    pub fn second(&self) -> f64 {
        match self {
            State::Torus(p) => p.y,
            State::Cylinder(s) => s.z,
        }
    }
}

/// The orbit `p0, M(p0), ..., M^n(p0)` of the selected map.
///
/// The state is carried in double-double between steps and rounded only on
/// output, so nearby orbits computed along different routes (for example
/// `G` versus its conjugate `F_L`) stay comparable for several steps despite
/// the expansion rate of order `L`.
pub fn trajectory(p0: State, params: &MapParams, n: usize, map: MapKind) -> Result<Vec<State>, MapError> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(p0);
    match (map, p0) {
        (MapKind::HatF | MapKind::Standard, State::Torus(p)) => {
            let step = if map == MapKind::HatF { hat_f_dd } else { standard_dd };
            let (mut x, mut y) = (DoubleDouble::from_f64(p.x), DoubleDouble::from_f64(p.y));
            for _ in 0..n {
                (x, y) = step(x, y, params.l);
                out.push(State::Torus(TorusPoint::from_dd(x, y)));
            }
        }
        (MapKind::SlowFast, State::Cylinder(s)) => {
            let (k, eps) = params.shear_dd()?;
            let (mut x, mut z) = (DoubleDouble::from_f64(s.x), DoubleDouble::from_f64(s.z));
            for _ in 0..n {
                (x, z) = slowfast_dd(x, z, k, eps);
                out.push(State::Cylinder(CylinderState {
                    x: x.to_unit_f64(),
                    z: z.to_f64(),
                }));
            }
        }
        (MapKind::SlowFast, State::Torus(_)) => return Err(MapError::StateMismatch("G acts on cylinder states")),
        (_, State::Cylinder(_)) => return Err(MapError::StateMismatch("torus maps act on torus points")),
    }
    Ok(out)
}

/// Streams the `x`-coordinates of a `hat F` orbit (equivalently of `F_L`,
/// which shares them) to `visit`, without storing the orbit.
pub fn for_each_x_hat_f(p0: TorusPoint, l: f64, n: usize, mut visit: impl FnMut(usize, f64)) {
    let (mut x, mut y) = (DoubleDouble::from_f64(p0.x), DoubleDouble::from_f64(p0.y));
    visit(0, p0.x);
    for i in 1..=n {
        (x, y) = hat_f_dd(x, y, l);
        visit(i, x.to_unit_f64());
    }
}

/// Like [`for_each_x_hat_f`] for the standard map started from `(x, y)`
/// where `y` is supplied in double-double.
pub fn for_each_x_standard_dd(x0: f64, y0: DoubleDouble, l: f64, n: usize, mut visit: impl FnMut(usize, f64)) {
    let (mut x, mut y) = (DoubleDouble::from_f64(x0), y0.frac_dd());
    visit(0, x0);
    for i in 1..=n {
        (x, y) = standard_dd(x, y, l);
        visit(i, x.to_unit_f64());
    }
}

/// Outcome of [`conjugacy_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyCheck {
    pub samples: usize,
    pub steps: usize,
    /// Largest circle distance between corresponding x-coordinates.
    pub max_deviation: f64,
}

/// Iterates `G` from `(x, epsilon^(1+alpha) y)` and `hat F` from the
/// conjugate of `(x, y)` for `samples` random `(x, y)`, and records how far
/// their x-orbits drift apart within `steps` steps.
pub fn conjugacy_check(params: &MapParams, samples: usize, steps: usize, seed: u64) -> Result<ConjugacyCheck, MapError> {
    let (k, _) = params.shear_dd()?;
    let mut max_deviation = 0.0f64;
    for i in 0..samples as u64 {
        let (x, y) = crate::stats::rng::uniform_pair(seed, i);
        let z = DoubleDouble::from_f64(y).div_dd(k).to_f64();
        let raw = trajectory(State::Cylinder(CylinderState::new(x, z)?), params, steps, MapKind::SlowFast)?;
        // G(x, z) corresponds to F_L(x, K z mod 1)
        let y_std = (k * z).frac();
        let hat = trajectory(State::Torus(conjugate(TorusPoint::wrap(x, y_std))), params, steps, MapKind::HatF)?;
        for (a, b) in raw.iter().zip(&hat) {
            let d = (a.x() - b.x()).abs();
            max_deviation = max_deviation.max(d.min(1.0 - d));
        }
    }
    Ok(ConjugacyCheck {
        samples,
        steps,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(x: f64, y: f64) -> TorusPoint {
        TorusPoint::new(x, y).unwrap()
    }

    #[test]
    fn eval_f_examples() {
        assert_eq!(eval_f(0.0, 100.0), 0.0);
        assert_eq!(eval_f(0.25, 10.0), 10.5);
        assert!((eval_f(0.5, 1e3) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn hat_f_examples() {
        for l in [1.0, 10.0, 1e3, 1e9] {
            assert_eq!(step_hat_f(tp(0.0, 0.0), l), tp(0.0, 0.0));
            assert_eq!(step_hat_f(tp(0.5, 0.0), l), tp(0.0, 0.5));
        }
        assert_eq!(step_hat_f(tp(0.25, 0.5), 10.0), tp(0.0, 0.25));
    }

    #[test]
    fn standard_map_examples() {
        assert_eq!(step_standard(tp(0.0, 0.3), 7.0), tp(0.3, 0.3));
        assert_eq!(step_standard(tp(0.5, 0.0), 7.0), tp(0.5, 0.0));
        assert_eq!(step_standard(tp(0.25, 0.0), 1.0), tp(0.25, 0.0));
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate(tp(0.7, 0.0)), tp(0.7, 0.7));
        let c = conjugate(tp(0.2, 0.5));
        assert_eq!(c.x(), 0.2);
        assert!((c.y() - 0.7).abs() < 1e-16);
    }

    #[test]
    fn lifted_examples() {
        assert_eq!(step_lifted(tp(0.25, 0.5), 10.0), LiftedPoint { x: 10.0, y: 0.25 });
        assert_eq!(step_lifted(tp(0.0, 0.0), 3.0), LiftedPoint { x: 0.0, y: 0.0 });
    }

    #[test]
    fn slowfast_examples() {
        let p = MapParams::from_epsilon_alpha(0.1, 1.0).unwrap();
        let s = step_slowfast(CylinderState::new(0.0, 0.0).unwrap(), &p).unwrap();
        assert_eq!(s, CylinderState::new(0.0, 0.0).unwrap());
        let s = step_slowfast(CylinderState::new(0.25, 0.0).unwrap(), &p).unwrap();
        assert!((s.x() - 0.25).abs() < 1e-12);
        assert!((s.z - 0.1).abs() < 1e-16);
        let z = 0.123;
        let s = step_slowfast(CylinderState::new(0.5, z).unwrap(), &p).unwrap();
        let expected = crate::numerics::frac(0.5 + 100.0 * z);
        assert!((s.x() - expected).abs() < 1e-12);
        assert_eq!(s.z, z);
    }

    #[test]
    fn precision_domain_is_enforced() {
        // epsilon^-(1+alpha) = 2^45
        let p = MapParams::from_epsilon_alpha(2f64.powi(-5), 8.0).unwrap();
        let err = step_slowfast(CylinderState::new(0.1, 0.0).unwrap(), &p).unwrap_err();
        assert!(matches!(err, MapError::PrecisionDomainExceeded { .. }));
        let p = MapParams::from_epsilon_alpha(2f64.powi(-10), 3.0).unwrap();
        assert!(step_slowfast(CylinderState::new(0.1, 0.0).unwrap(), &p).is_ok());
    }

    #[test]
    fn params_derived_fields() {
        let p = MapParams::from_epsilon_alpha(0.05, 9.0).unwrap();
        assert!((p.l - 0.05f64.powf(-9.0)).abs() / p.l < 1e-12);
        assert_eq!(p.beta, Some(2.0 / 9.0));
        assert_eq!(p.n_of_l, Some(p.l.powf(2.0 / 9.0).floor() as u64));
        assert!(MapParams::from_l(-1.0).is_err());
        assert!(MapParams::from_epsilon_alpha(1.0, 1.0).is_err());
    }

    #[test]
    fn trajectory_fixed_point_and_length() {
        let p = MapParams::from_l(1e3).unwrap();
        let orbit = trajectory(State::Torus(tp(0.0, 0.0)), &p, 100, MapKind::HatF).unwrap();
        assert_eq!(orbit.len(), 101);
        assert!(orbit.iter().all(|s| *s == State::Torus(tp(0.0, 0.0))));
        assert!(trajectory(State::Torus(tp(0.0, 0.0)), &p, 3, MapKind::SlowFast).is_err());
    }

    #[test]
    fn conjugate_orbits_agree() {
        let p = MapParams::from_epsilon_alpha(2f64.powi(-10), 1.0).unwrap();
        let c = conjugacy_check(&p, 200, 5, 1).unwrap();
        assert!(c.max_deviation <= 1e-6, "{c:?}");
        assert!(conjugacy_check(&MapParams::from_l(1e3).unwrap(), 1, 1, 1).is_err());
    }

    #[test]
    fn trajectory_matches_single_steps() {
        let p = MapParams::from_l(5.0).unwrap();
        let start = tp(0.3141, 0.2718);
        let orbit = trajectory(State::Torus(start), &p, 3, MapKind::Standard).unwrap();
        let mut q = start;
        for s in &orbit[1..] {
            q = step_standard(q, p.l);
            let State::Torus(o) = s else { panic!() };
            assert!((o.x() - q.x()).abs() < 1e-11 && (o.y() - q.y()).abs() < 1e-11);
        }
    }
}
