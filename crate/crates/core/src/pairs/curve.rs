//! u-curves in pullback form and the densities they carry.
//!
//! A curve of depth `d` is the image under `d` steps of `hat F` of a piece
//! of a horizontal root segment. A point `x_d` of it determines the whole
//! backward chain `x_{d-1}, ..., x_0` through
//!
//! ```text
//! x_k = f(x_{k-1}) - x_{k-2} - n_k,   k = 1..d,   x_{-1} = y_0,
//! ```
//!
//! where `n_k` is the integer shift that brings the image of level `k - 1`
//! back to the own coordinates of level `k`. The chain is solved with
//! top-down Gauss-Seidel sweeps of one-dimensional inversions of `f`; each
//! sweep contracts the error by a factor of order `1 / |fdot|`. Heights,
//! slopes, curvatures and log-densities then follow from a single upward
//! recursion.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::PairError;
use crate::geometry::{f_ddot, f_dot};
use crate::numerics::dd::DoubleDouble;
use crate::numerics::quadrature::{integrate_panels, kronrod15, PanelValue, QuadratureOptions};
use crate::numerics::trig::sincos_2pi_dd;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Density of the root pair, before normalization to its domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RootDensity {
    Uniform,
    /// `1 + amplitude * sin(2 pi k x)` with `|amplitude| < 1`.
    Tilted { amplitude: f64, k: u32 },
}

impl RootDensity {
    fn unnormalized(&self, x: f64) -> (f64, f64) {
        match *self {
            RootDensity::Uniform => (1.0, 0.0),
            RootDensity::Tilted { amplitude, k } => {
                let (s, c) = sincos_2pi_dd(k as f64 * x);
                let rho = 1.0 + amplitude * s.to_f64();
                let drho = TWO_PI * k as f64 * amplitude * c.to_f64();
                (rho, drho)
            }
        }
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            RootDensity::Uniform => b - a,
            RootDensity::Tilted { amplitude, k } => {
                let w = TWO_PI * k as f64;
                let (_, ca) = sincos_2pi_dd(k as f64 * a);
                let (_, cb) = sincos_2pi_dd(k as f64 * b);
                (b - a) - amplitude / w * (cb - ca).to_f64()
            }
        }
    }

    /// Supremum of `|d log rho / dx|`.
    pub fn log_derivative_bound(&self) -> f64 {
        match *self {
            RootDensity::Uniform => 0.0,
            RootDensity::Tilted { amplitude, k } => {
                TWO_PI * k as f64 * amplitude.abs() / (1.0 - amplitude * amplitude).sqrt()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Root {
    pub height: f64,
    pub density: RootDensity,
    pub log_norm: f64,
}

#[derive(Debug)]
pub(crate) struct CurveNode {
    pub parent: Option<Arc<CurveNode>>,
    /// Own lifted coordinates, `0 < b - a <= 1`.
    pub domain: (f64, f64),
    /// Interval of the parent's coordinates that maps onto `domain`.
    pub branch: (f64, f64),
    /// `x_own = f_gamma_parent(x_parent) - shift`.
    pub shift: f64,
    /// Log of the parent mass carried by `branch`.
    pub ln_w: f64,
    pub root: Root,
    pub depth: usize,
    pub l: f64,
}

/// A u-curve `{(x, h(x)) : x in I}`, evaluated through its ancestry.
#[derive(Clone, Debug)]
pub struct UCurve(pub(crate) Arc<CurveNode>);

/// Everything known about a curve at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    /// Height in the parent's lifted coordinates (continuous along the curve).
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub log_rho: f64,
    pub dlog_rho: f64,
}

impl CurvePoint {
    /// `f_gamma(x) = f(x) - h(x)`, unreduced.
    pub fn f_gamma(&self, l: f64) -> f64 {
        (crate::maps::eval_f_dd(self.x, l) - DoubleDouble::from_f64(self.h)).to_f64()
    }

    pub fn f_gamma_dot(&self, l: f64) -> f64 {
        f_dot(self.x, l) - self.h1
    }

    pub fn f_gamma_ddot(&self, l: f64) -> f64 {
        f_ddot(self.x, l) - self.h2
    }

    pub fn density(&self) -> f64 {
        self.log_rho.exp()
    }
}

impl UCurve {
    /// Horizontal root curve at height `y0` over `domain`, carrying the
    /// normalized restriction of `density`.
    pub fn root(l: f64, y0: f64, domain: (f64, f64), density: RootDensity) -> Result<Self, PairError> {
        let (a, b) = domain;
        if !(b > a && b - a <= 1.0 + 1e-15) {
            return Err(PairError::InvariantViolation(format!(
                "root domain must have length in (0, 1], got [{a}, {b}]"
            )));
        }
        if let RootDensity::Tilted { amplitude, k } = density {
            if !(amplitude.abs() < 1.0 && k >= 1) {
                return Err(PairError::InvariantViolation(
                    "tilted density needs |amplitude| < 1 and k >= 1".into(),
                ));
            }
        }
        let z = density.integral(a, b);
        Ok(UCurve(Arc::new(CurveNode {
            parent: None,
            domain,
            branch: domain,
            shift: 0.0,
            ln_w: 0.0,
            root: Root {
                height: y0,
                density,
                log_norm: z.ln(),
            },
            depth: 0,
            l,
        })))
    }

    /// Fully crossing horizontal curve at height `y0` with uniform density.
    pub fn horizontal(l: f64, y0: f64) -> Self {
        Self::root(l, y0, (0.0, 1.0), RootDensity::Uniform).expect("unit domain is valid")
    }

    /// The image of `branch` under `f_gamma` of `parent`, in the coordinates
    /// `f_gamma - shift` where it occupies `domain`.
    pub(crate) fn child(parent: &UCurve, branch: (f64, f64), shift: f64, domain: (f64, f64), ln_w: f64) -> Self {
        let p = &parent.0;
        UCurve(Arc::new(CurveNode {
            parent: Some(parent.0.clone()),
            domain,
            branch: (branch.0.min(branch.1), branch.0.max(branch.1)),
            shift,
            ln_w,
            root: p.root,
            depth: p.depth + 1,
            l: p.l,
        }))
    }

    pub fn domain(&self) -> (f64, f64) {
        self.0.domain
    }

    pub fn length(&self) -> f64 {
        self.0.domain.1 - self.0.domain.0
    }

    pub fn is_fully_crossing(&self) -> bool {
        self.length() == 1.0
    }

    pub fn depth(&self) -> usize {
        self.0.depth
    }

    pub fn l(&self) -> f64 {
        self.0.l
    }

    pub fn root_height(&self) -> f64 {
        self.0.root.height
    }

    pub fn root_density(&self) -> RootDensity {
        self.0.root.density
    }

    /// Integer shift applied when this curve was cut out of its parent's image.
    pub fn shift(&self) -> f64 {
        self.0.shift
    }

    pub fn evaluator(&self) -> CurveEvaluator {
        CurveEvaluator::new(self)
    }

    /// Convenience one-off evaluation; prefer an evaluator for many points.
    pub fn eval(&self, x: f64) -> Result<CurvePoint, PairError> {
        self.evaluator().eval(x)
    }
}

/// Solves the ancestry chain of one curve, reusing the previous solution as
/// the starting guess for the next point.
pub struct CurveEvaluator {
    /// Root first.
    chain: Vec<Arc<CurveNode>>,
    /// `x_0 .. x_{d-1}`.
    guess: Vec<f64>,
    warm: bool,
}

/// Solves `f(u) = c` for `u` in `[p, q]` where `f` is monotone; `c` is given
/// in double-double. Returns the clamped endpoint if `c` is out of range.
fn invert_f(l: f64, c: DoubleDouble, p: f64, q: f64, start: f64) -> f64 {
    let residual = |u: f64| (crate::maps::eval_f_dd(u, l) - c).to_f64();
    let rp = residual(p);
    let rq = residual(q);
    if rp == 0.0 {
        return p;
    }
    if rq == 0.0 {
        return q;
    }
    if rp.signum() == rq.signum() {
        return if rp.abs() < rq.abs() { p } else { q };
    }
    let increasing = rq > 0.0;
    let (mut lo, mut hi) = (p, q);
    let mut u = if start > p && start < q { start } else { 0.5 * (p + q) };
    for _ in 0..100 {
        let r = residual(u);
        if r == 0.0 {
            return u;
        }
        if (r > 0.0) == increasing {
            hi = u;
        } else {
            lo = u;
        }
        let delta = r / f_dot(u, l);
        let mut next = u - delta;
        if delta.abs() <= 2.0 * f64::EPSILON * u.abs().max(1e-3) {
            return next.clamp(p, q);
        }
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        u = next;
        if hi - lo <= 2.0 * f64::EPSILON * u.abs().max(1e-3) {
            break;
        }
    }
    u
}

impl CurveEvaluator {
    pub fn new(curve: &UCurve) -> Self {
        let mut chain = Vec::with_capacity(curve.0.depth + 1);
        let mut node = Some(curve.0.clone());
        while let Some(n) = node {
            node = n.parent.clone();
            chain.push(n);
        }
        chain.reverse();
        let guess = chain[1..].iter().map(|n| 0.5 * (n.branch.0 + n.branch.1)).collect();
        CurveEvaluator {
            chain,
            guess,
            warm: false,
        }
    }

    fn top(&self) -> &CurveNode {
        self.chain.last().expect("chain is never empty")
    }

    pub fn l(&self) -> f64 {
        self.top().l
    }

    fn solve_chain(&mut self, x: f64) {
        let d = self.chain.len() - 1;
        if d == 0 {
            return;
        }
        let l = self.top().l;
        let y0 = self.chain[0].root.height;
        if !self.warm {
            for k in 1..=d {
                let b = self.chain[k].branch;
                self.guess[k - 1] = 0.5 * (b.0 + b.1);
            }
        }
        for _sweep in 0..80 {
            let mut change: f64 = 0.0;
            let mut upper = x;
            for k in (1..=d).rev() {
                let node = &self.chain[k];
                let below = if k >= 2 { self.guess[k - 2] } else { y0 };
                let c = DoubleDouble::from_sum(upper, node.shift).add_f64(below);
                let old = self.guess[k - 1];
                let new = invert_f(l, c, node.branch.0, node.branch.1, old);
                change = change.max((new - old).abs());
                self.guess[k - 1] = new;
                upper = new;
            }
            if change <= 4.0 * f64::EPSILON || d == 1 {
                break;
            }
        }
        self.warm = true;
    }

    /// Evaluates the curve and its density at `x` in the domain.
    pub fn eval(&mut self, x: f64) -> Result<CurvePoint, PairError> {
        let (a, b) = self.top().domain;
        let slack = 1e-13 * a.abs().max(b.abs()).max(1.0);
        if !(x >= a - slack && x <= b + slack) {
            return Err(PairError::DomainError { x, domain: (a, b) });
        }
        self.solve_chain(x);
        let d = self.chain.len() - 1;
        let l = self.top().l;
        let root = self.chain[0].root;
        let x0 = if d == 0 { x } else { self.guess[0] };
        let (r0, dr0) = root.density.unnormalized(x0);
        let mut log_rho = r0.ln() - root.log_norm;
        let mut dlog = dr0 / r0;
        let (mut h, mut h1, mut h2) = (root.height, 0.0, 0.0);
        for k in 1..=d {
            let xk1 = self.guess[k - 1];
            let fp = f_dot(xk1, l) - h1;
            let fpp = f_ddot(xk1, l) - h2;
            h1 = 1.0 / fp;
            h2 = -fpp / (fp * fp * fp);
            dlog = dlog / fp - fpp / (fp * fp);
            log_rho = log_rho - fp.abs().ln() - self.chain[k].ln_w;
            h = xk1;
        }
        Ok(CurvePoint {
            x,
            h,
            h1,
            h2,
            log_rho,
            dlog_rho: dlog,
        })
    }

    /// The backward chain `x_0, ..., x_{d-1}` of the last evaluated point.
    pub fn chain(&self) -> &[f64] {
        &self.guess
    }

    /// `f_gamma` and its first derivative at `x`.
    pub fn f_gamma(&mut self, x: f64) -> Result<(f64, f64), PairError> {
        let l = self.l();
        let p = self.eval(x)?;
        Ok((p.f_gamma(l), p.f_gamma_dot(l)))
    }

    /// `f_gamma(x)` in double-double, for image endpoints that are not
    /// themselves inversion targets.
    pub(crate) fn f_gamma_dd(&mut self, x: f64) -> Result<DoubleDouble, PairError> {
        let l = self.l();
        let p = self.eval(x)?;
        Ok(crate::maps::eval_f_dd(x, l) - DoubleDouble::from_f64(p.h))
    }

    /// Mass of the (normalized) density over `[a, b]`.
    pub fn mass(&mut self, a: f64, b: f64) -> Result<f64, PairError> {
        self.mass_panels(a, b).map(|(m, _)| m)
    }

    pub(crate) fn mass_panels(&mut self, a: f64, b: f64) -> Result<(f64, Vec<PanelValue>), PairError> {
        if b <= a {
            return Ok((0.0, Vec::new()));
        }
        let opts = QuadratureOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 4000,
        };
        let mut failure = None;
        let r = integrate_panels(
            |x| match self.eval(x) {
                Ok(p) => p.density(),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let (r, panels) = r.map_err(PairError::QuadratureFailure)?;
        Ok((r.value, panels))
    }

    /// Finds `x` in `[a, b]` with `int_a^x rho = target`, given the panels of
    /// a previous [`Self::mass_panels`] call over `[a, b]`.
    pub(crate) fn invert_cdf(&mut self, panels: &[PanelValue], target: f64) -> Result<f64, PairError> {
        let mut acc = 0.0;
        let mut chosen = panels.last().copied().ok_or_else(|| {
            PairError::InvariantViolation("cannot sample from an empty interval".into())
        })?;
        for p in panels {
            if acc + p.value >= target {
                chosen = *p;
                break;
            }
            acc += p.value;
        }
        let want = (target - acc).clamp(0.0, chosen.value);
        let (mut lo, mut hi) = (chosen.a, chosen.b);
        let mut x = chosen.a + (chosen.b - chosen.a) * if chosen.value > 0.0 { want / chosen.value } else { 0.5 };
        for _ in 0..60 {
            let mut failure = None;
            let partial = kronrod15(
                |t| match self.eval(t) {
                    Ok(p) => p.density(),
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                chosen.a,
                x,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let g = partial.map_err(PairError::QuadratureFailure)? - want;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let rho = self.eval(x)?.density();
            let mut next = x - g / rho;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - x).abs();
            x = next;
            if step <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        Ok(x)
    }
}

/// Signed image `f_gamma(x)` of a curve point, the horizontal coordinate of
/// `tilde F(x, h(x))`.
pub fn f_gamma(curve: &UCurve, x: f64) -> Result<f64, PairError> {
    let p = curve.eval(x)?;
    Ok(p.f_gamma(curve.l()))
}

/// `(f_gamma, f_gamma', f_gamma'')` at `x`.
pub fn f_gamma_derivatives(curve: &UCurve, x: f64) -> Result<(f64, f64, f64), PairError> {
    let p = curve.eval(x)?;
    let l = curve.l();
    Ok((p.f_gamma(l), p.f_gamma_dot(l), p.f_gamma_ddot(l)))
}

/// Residual tolerance of [`invert_f_gamma`] at a solution `x`: `1e-12`, or a
/// few units in the last place of `x` scaled by the slope when that is larger
/// (at large `L` a single ulp of `x` moves `f_gamma` by more than `1e-12`).
pub fn inversion_tolerance(x: f64, slope: f64) -> f64 {
    let ulp = f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
    1e-12_f64.max(4.0 * ulp * slope.abs())
}

/// Solves `f_gamma(x) = target` for `x` in `bracket`, on which `f_gamma`
/// must be monotone.
pub fn invert_f_gamma(curve: &UCurve, target: f64, bracket: (f64, f64)) -> Result<f64, PairError> {
    let mut ev = curve.evaluator();
    invert_with(&mut ev, target, bracket)
}

pub(crate) fn invert_with(ev: &mut CurveEvaluator, target: f64, bracket: (f64, f64)) -> Result<f64, PairError> {
    let (p, q) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let (fp, _) = ev.f_gamma(p)?;
    let (fq, _) = ev.f_gamma(q)?;
    let (lo_v, hi_v) = (fp.min(fq), fp.max(fq));
    let slack = 1e-12 * lo_v.abs().max(hi_v.abs()).max(1.0);
    if !(target >= lo_v - slack && target <= hi_v + slack) {
        return Err(PairError::BracketError {
            target,
            range: (lo_v, hi_v),
        });
    }
    if target <= lo_v {
        return Ok(if fp <= fq { p } else { q });
    }
    if target >= hi_v {
        return Ok(if fp >= fq { p } else { q });
    }
    let increasing = fq > fp;
    let (mut lo, mut hi) = (p, q);
    let mut x = p + (q - p) * (target - fp) / (fq - fp);
    if !(x > p && x < q) {
        x = 0.5 * (p + q);
    }
    for _ in 0..200 {
        let (v, d) = ev.f_gamma(x)?;
        let r = v - target;
        if r == 0.0 {
            return Ok(x);
        }
        if (r > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let delta = r / d;
        let mut next = x - delta;
        // f_gamma itself is only known to about one ulp of its value
        if delta.abs() <= 2.0 * f64::EPSILON * x.abs() || r.abs() <= 2.0 * f64::EPSILON * target.abs() {
            return Ok(next.clamp(p, q));
        }
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        x = next;
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::critical_intervals;
    use crate::maps::{eval_f, step_lifted, LiftedPoint};
    use crate::pairs::testutil::descend;

    #[test]
    fn horizontal_root_is_f_minus_height() {
        let (l, y0) = (1e3, 0.3);
        let c = UCurve::horizontal(l, y0);
        for x in [0.0, 0.1, 0.37, 0.9] {
            let v = f_gamma(&c, x).unwrap();
            assert!((v - (eval_f(x, l) - y0)).abs() <= 1e-12 * l);
        }
        let (_, d, _) = f_gamma_derivatives(&c, 0.25).unwrap();
        assert_eq!(d, 2.0);
        assert!(matches!(f_gamma(&c, 1.5), Err(PairError::DomainError { .. })));
    }

    #[test]
    fn chain_reproduces_the_forward_orbit() {
        let (l, y0) = (1e4, 0.17);
        let pair = descend(l, y0, 4, 11);
        let mut ev = pair.curve.evaluator();
        for x in [0.05, 0.4, 0.81] {
            let p = ev.eval(x).unwrap();
            let chain = ev.chain().to_vec();
            let mut levels = vec![y0];
            levels.extend_from_slice(&chain);
            levels.push(x);
            // one forward step per link: the full orbit would amplify rounding
            for k in 2..levels.len() {
                let q = step_lifted(LiftedPoint { x: levels[k - 1], y: levels[k - 2] }, l);
                let d = (q.x - levels[k]).rem_euclid(1.0);
                let d = d.min(1.0 - d);
                assert!(d <= 1e-10 * l, "level {k}: {} vs {}", q.x, levels[k]);
            }
            assert_eq!(p.h, chain[3]);
        }
    }

    #[test]
    fn f_gamma_is_monotone_off_the_strips() {
        let l = 1e3;
        let pair = descend(l, 0.0, 2, 5);
        let s = critical_intervals(l, 0.5).unwrap();
        let mut ev = pair.curve.evaluator();
        let pieces = [(0.0, s.intervals[0].0), (s.intervals[0].1, s.intervals[1].0), (s.intervals[1].1, 1.0)];
        for (a, b) in pieces {
            let signs: Vec<f64> = (0..1000)
                .map(|i| {
                    let x = a + (b - a) * (i as f64 + 0.5) / 1000.0;
                    ev.f_gamma(x).unwrap().1.signum()
                })
                .collect();
            assert!(signs.iter().all(|&v| v == signs[0]));
            let (lo, _) = ev.f_gamma(a).unwrap();
            let (_, d) = ev.f_gamma(0.5 * (a + b)).unwrap();
            assert!(d.abs() >= l.sqrt(), "|fdot_gamma| = {} at the middle, start {lo}", d.abs());
        }
    }

    #[test]
    fn inversion_round_trip_on_the_root() {
        let l = 1e4;
        let c = UCurve::horizontal(l, 0.0);
        let s = critical_intervals(l, 0.5).unwrap();
        let bracket = (0.0, s.intervals[0].0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ev = c.evaluator();
        for _ in 0..10_000 {
            let x0 = rng.random_range(bracket.0..bracket.1);
            let (t, d) = ev.f_gamma(x0).unwrap();
            let x = invert_with(&mut ev, t, bracket).unwrap();
            assert!((x - x0).abs() <= 1e-12, "{x} vs {x0}");
            let (v, _) = ev.f_gamma(x).unwrap();
            assert!((v - t).abs() <= inversion_tolerance(t, 1.0).max(1e-12), "residual {}", v - t);
            assert!(d.abs() > 0.0);
        }
    }

    #[test]
    fn inverse_derivative_matches_finite_differences() {
        let l = 1e3;
        let pair = descend(l, 0.2, 2, 9);
        let s = critical_intervals(l, 0.5).unwrap();
        let bracket = (s.intervals[0].1, s.intervals[1].0);
        let mut ev = pair.curve.evaluator();
        let (ta, _) = ev.f_gamma(bracket.0).unwrap();
        let (tb, _) = ev.f_gamma(bracket.1).unwrap();
        for k in 1..20 {
            let t = ta + (tb - ta) * k as f64 / 20.0;
            let x = invert_with(&mut ev, t, bracket).unwrap();
            let (_, d) = ev.f_gamma(x).unwrap();
            let h = 1e-3;
            let xp = invert_with(&mut ev, t + h, bracket).unwrap();
            let xm = invert_with(&mut ev, t - h, bracket).unwrap();
            let fd = (xp - xm) / (2.0 * h);
            assert!((fd - 1.0 / d).abs() <= 1e-8, "{fd} vs {}", 1.0 / d);
        }
    }

    #[test]
    fn out_of_range_targets_are_rejected() {
        let c = UCurve::horizontal(1e3, 0.0);
        assert!(matches!(
            invert_f_gamma(&c, 1e6, (0.0, 0.2)),
            Err(PairError::BracketError { .. })
        ));
    }

    fn richardson(g: &mut impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
        let d = |g: &mut dyn FnMut(f64) -> f64, h: f64| (g(x + h) - g(x - h)) / (2.0 * h);
        let (d1, d2) = (d(g, h), d(g, h / 2.0));
        (4.0 * d2 - d1) / 3.0
    }

    #[test]
    fn log_density_derivative_matches_finite_differences() {
        let mut worst: f64 = 0.0;
        for (seed, depth) in [(1u64, 1usize), (2, 2), (3, 3)] {
            let pair = descend(1e3, 0.1, depth, seed);
            let (a, b) = pair.curve.domain();
            let h = (1e-3f64).min((b - a) / 20.0);
            let mut ev = pair.curve.evaluator();
            let mut fd_ev = pair.curve.evaluator();
            for i in 0..200 {
                let x = a + 2.0 * h + (b - a - 4.0 * h) * (i as f64 + 0.5) / 200.0;
                let cf = ev.eval(x).unwrap().dlog_rho;
                let fd = richardson(&mut |u| fd_ev.eval(u).unwrap().log_rho, x, h);
                worst = worst.max((fd - cf).abs() / cf.abs().max(1.0));
            }
        }
        assert!(worst <= 1e-6, "worst relative error {worst}");
    }

    #[test]
    fn slope_and_curvature_match_finite_differences() {
        let pair = descend(1e3, 0.4, 2, 21);
        let mut ev = pair.curve.evaluator();
        let mut fd_ev = pair.curve.evaluator();
        for x in [0.1, 0.33, 0.6, 0.9] {
            let p = ev.eval(x).unwrap();
            let h1 = richardson(&mut |u| fd_ev.eval(u).unwrap().h, x, 1e-4);
            let h2 = richardson(&mut |u| fd_ev.eval(u).unwrap().h1, x, 1e-4);
            assert!((h1 - p.h1).abs() <= 1e-8 * p.h1.abs().max(1e-6), "{h1} vs {}", p.h1);
            assert!((h2 - p.h2).abs() <= 1e-6 * p.h2.abs().max(1e-3), "{h2} vs {}", p.h2);
        }
    }

    #[test]
    fn tilted_root_density_is_normalized() {
        let d = RootDensity::Tilted { amplitude: 0.5, k: 3 };
        let c = UCurve::root(1e3, 0.0, (0.1, 0.7), d).unwrap();
        let m = c.evaluator().mass(0.1, 0.7).unwrap();
        assert!((m - 1.0).abs() <= 1e-12);
        let mut ev = c.evaluator();
        let mut fd_ev = c.evaluator();
        let cf = ev.eval(0.4).unwrap().dlog_rho;
        let fd = richardson(&mut |u| fd_ev.eval(u).unwrap().log_rho, 0.4, 1e-3);
        assert!((fd - cf).abs() <= 1e-8);
        assert!(cf.abs() <= d.log_derivative_bound());
    }
}
