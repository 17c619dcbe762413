//! Integrals against measure pairs and of observables pushed forward along
//! a curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cuts::{meets_strips, substandard_max_len};
use super::{MeasurePair, PairError, Regularity, C0};
use crate::geometry::{critical_intervals, f_dot};
use crate::maps::{for_each_x_hat_f, TorusPoint};
use crate::numerics::quadrature::{gauss_legendre, integrate, QuadratureOptions};
use crate::numerics::sum::{pairwise_sum, CompensatedSum};
use crate::numerics::frac;

/// `int phi(x, h(x)) rho(x) dx` over the curve, with both arguments of
/// `phi` reduced to `[0, 1)`.
pub fn integrate_observable<P: Fn(f64, f64) -> f64>(pair: &MeasurePair, phi: P) -> Result<f64, PairError> {
    let (a, b) = pair.curve.domain();
    let mut ev = pair.curve.evaluator();
    let mut failure = None;
    let r = integrate(
        |x| match ev.eval(x) {
            Ok(p) => phi(frac(x), frac(p.h)) * p.density(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        QuadratureOptions {
            abs_tol: 1e-11,
            rel_tol: 0.0,
            max_intervals: 20_000,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.map_err(PairError::QuadratureFailure)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PushforwardOptions {
    /// Upper bound on the number of integrand evaluations.
    pub node_cap: usize,
}

impl Default for PushforwardOptions {
    fn default() -> Self {
        PushforwardOptions { node_cap: 50_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardIntegral {
    pub value: f64,
    /// Difference from the same rule with twice as many nodes.
    pub doubling_difference: f64,
    pub nodes: usize,
}

const GL_ORDER: usize = 16;

/// `int phi(x_n) rho(x) dx` along the seed, where `x_n` is the first
/// coordinate of `hat F^n (x, h(x))`.
///
/// The rule is a composite Gauss-Legendre rule whose panels are narrow enough
/// that `phi(x_n)` completes at most about one oscillation on each of them;
/// it is then repeated with every panel halved.
pub fn pair_pushforward_integral<P: Fn(f64) -> f64 + Sync>(
    seed: &MeasurePair,
    phi: P,
    n: usize,
    opts: &PushforwardOptions,
) -> Result<PushforwardIntegral, PairError> {
    if n == 0 {
        return Err(PairError::InvariantViolation("the number of steps must be at least one".into()));
    }
    let l = seed.l();
    let (a, b) = seed.curve.domain();
    // the mean of |fdot| is about 4L; a rough count refuses hopeless requests early
    let estimate = 3.0 * GL_ORDER as f64 * (b - a) * (TAU * l + 2.0) * (4.0 * l + 2.0).powi(n as i32 - 1);
    if estimate > opts.node_cap as f64 {
        return Err(PairError::ResolutionExceeded { cap: opts.node_cap });
    }
    let panels = if n == 1 {
        let p = ((TAU * l + 2.0) * (b - a)).ceil().max(1.0) as usize;
        (0..=p).map(|i| if i == p { b } else { a + (b - a) * i as f64 / p as f64 }).collect()
    } else {
        marching_breaks(seed, n, opts)?
    };
    if 3 * GL_ORDER * (panels.len() - 1) > opts.node_cap {
        return Err(PairError::ResolutionExceeded { cap: opts.node_cap });
    }
    let coarse = composite(seed, &phi, n, &panels, 1)?;
    let fine = composite(seed, &phi, n, &panels, 2)?;
    Ok(PushforwardIntegral {
        value: fine,
        doubling_difference: (fine - coarse).abs(),
        nodes: 3 * GL_ORDER * (panels.len() - 1),
    })
}

const TAU: f64 = std::f64::consts::TAU;

/// Panel breaks on which every intermediate coordinate `x_k`, `k < n`, moves
/// by at most `1 / (2 pi L)` and `x_n` by at most one unit.
fn marching_breaks(seed: &MeasurePair, n: usize, opts: &PushforwardOptions) -> Result<Vec<f64>, PairError> {
    let l = seed.l();
    let (a, b) = seed.curve.domain();
    let mut ev = seed.curve.evaluator();
    let max_panels = opts.node_cap / (3 * GL_ORDER);
    let mut breaks = vec![a];
    let mut x = a;
    while x < b {
        let p = ev.eval(x)?;
        let (mut vx, mut vy) = (1.0f64, p.h1);
        // largest |dx_k/dx| over the intermediate steps
        let mut inner = 1.0f64;
        for_each_x_hat_f(TorusPoint::wrap(x, p.h), l, n - 1, |_, xi| {
            inner = inner.max(vx.abs());
            (vx, vy) = (f_dot(xi, l) * vx - vy, vx);
        });
        let w = (1.0 / (vx.abs() + 1.0)).min(1.0 / (TAU * l * (inner + 1.0)));
        x = (x + w).min(b);
        breaks.push(x);
        if breaks.len() > max_panels {
            return Err(PairError::ResolutionExceeded { cap: opts.node_cap });
        }
    }
    Ok(breaks)
}

fn composite<P: Fn(f64) -> f64 + Sync>(
    seed: &MeasurePair,
    phi: &P,
    n: usize,
    breaks: &[f64],
    split: usize,
) -> Result<f64, PairError> {
    const BLOCK: usize = 256;
    let l = seed.l();
    let (nodes, weights) = gauss_legendre(GL_ORDER);
    let windows: Vec<&[f64]> = breaks.windows(2).collect();
    let blocks: Vec<f64> = windows
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut ev = seed.curve.evaluator();
            let mut acc = CompensatedSum::new();
            for w in chunk {
                for j in 0..split {
                    let lo = w[0] + (w[1] - w[0]) * j as f64 / split as f64;
                    let hi = w[0] + (w[1] - w[0]) * (j + 1) as f64 / split as f64;
                    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                    for (t, wt) in nodes.iter().zip(&weights) {
                        let x = mid + half * t;
                        let p = ev.eval(x)?;
                        let mut xn = 0.0;
                        for_each_x_hat_f(TorusPoint::wrap(x, p.h), l, n, |i, xi| {
                            if i == n {
                                xn = xi;
                            }
                        });
                        acc.add(half * wt * phi(xn) * p.density());
                    }
                }
            }
            Ok(acc.value())
        })
        .collect::<Result<_, PairError>>()?;
    Ok(pairwise_sum(&blocks))
}

/// Result of checking a pair against its class invariants by sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub length: f64,
    pub normalization: f64,
    pub max_slope: f64,
    pub max_curvature: f64,
    pub max_log_derivative: f64,
    pub violations: Vec<String>,
}

impl PairReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `pair` at `samples` points and checks the u-curve bounds, the
/// density normalization, the log-derivative bound and the length and strip
/// conditions of its regularity class.
pub fn verify_pair(pair: &MeasurePair, a0: f64, samples: usize) -> Result<PairReport, PairError> {
    let l = pair.l();
    let (a, b) = pair.curve.domain();
    let mut ev = pair.curve.evaluator();
    let (mut slope, mut curv, mut dlog) = (0.0f64, 0.0f64, 0.0f64);
    let k = samples.max(2);
    for i in 0..k {
        let x = a + (b - a) * i as f64 / (k - 1) as f64;
        let p = ev.eval(x.min(b))?;
        slope = slope.max(p.h1.abs());
        curv = curv.max(p.h2.abs());
        dlog = dlog.max(p.dlog_rho.abs());
    }
    let normalization = ev.mass(a, b)?;
    let mut violations = Vec::new();
    let bound = pair.log_derivative_bound();
    if pair.curve.depth() > 0 {
        if slope > 0.1 {
            violations.push(format!("slope {slope} exceeds 1/10"));
        }
        if curv > l {
            violations.push(format!("curvature {curv} exceeds L"));
        }
    }
    if (normalization - 1.0).abs() > 1e-10 {
        violations.push(format!("density integrates to {normalization}"));
    }
    if dlog > bound * (1.0 + 1e-9) + 1e-12 {
        violations.push(format!("log-derivative {dlog} exceeds its bound {bound}"));
    }
    let len = b - a;
    match pair.regularity {
        Regularity::FullCrossing => {
            if !pair.curve.is_fully_crossing() {
                violations.push(format!("fully crossing pair has length {len}"));
            }
            if bound > 3.0 * C0 * (1.0 + 1e-9) {
                violations.push(format!("bound {bound} exceeds 3 C0"));
            }
        }
        Regularity::Standard => {
            if len <= a0 {
                violations.push(format!("standard pair has length {len}"));
            }
            if bound > 3.0 * C0 * (1.0 + 1e-9) {
                violations.push(format!("bound {bound} exceeds 3 C0"));
            }
        }
        Regularity::Substandard => {
            let lo = l.powf(-0.5) * (1.0 - 1e-9);
            if len < lo || len > substandard_max_len(a0, l) * (1.0 + 1e-9) {
                violations.push(format!("substandard pair has length {len}"));
            }
            if bound > 2.0 * C0 * l.sqrt() * (1.0 + 1e-9) {
                violations.push(format!("bound {bound} exceeds 2 C0 L^1/2"));
            }
            if meets_strips(&critical_intervals(l, 0.5)?, a, b) {
                violations.push("substandard pair meets S_1/2".into());
            }
        }
    }
    Ok(PairReport {
        length: len,
        normalization,
        max_slope: slope,
        max_curvature: curv,
        max_log_derivative: dlog,
        violations,
    })
}
