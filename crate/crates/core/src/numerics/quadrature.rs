//! Adaptive Gauss-Kronrod (7/15) quadrature and fixed Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::sum::CompensatedSum;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not reach tolerance {target:e} (estimate {estimate:e}) within {intervals} subintervals")]
    ToleranceNotMet {
        target: f64,
        estimate: f64,
        intervals: usize,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4096,
        }
    }
}

impl QuadratureOptions {
    pub fn absolute(abs_tol: f64) -> Self {
        QuadratureOptions {
            abs_tol,
            rel_tol: 0.0,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite { x: center });
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite { x: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite { x: x2 });
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok((value, error))
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// The error estimate is the raw `|K15 - G7|` difference per panel, which is
/// conservative for smooth integrands.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
) -> Result<QuadratureResult, QuadratureError> {
    integrate_panels(f, a, b, opts).map(|(r, _)| r)
}

/// A converged subinterval `[a, b]` and its integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelValue {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

/// Like [`integrate`], also returning the final panels in increasing order,
/// which is enough to evaluate the running integral cheaply afterwards.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
) -> Result<(QuadratureResult, Vec<PanelValue>), QuadratureError> {
    if a == b {
        return Ok((
            QuadratureResult {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            },
            Vec::new(),
        ));
    }
    let (value, error) = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total_error = error;
    let mut total_value = value;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total_value.abs());
        if total_error <= target {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(QuadratureError::ToleranceNotMet {
                target,
                estimate: total_error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            return Err(QuadratureError::ToleranceNotMet {
                target,
                estimate: total_error,
                intervals: heap.len() + 1,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        let cancelled = worst.error > 0.5 * total_error;
        total_error += e1 + e2 - worst.error;
        total_value += v1 + v2 - worst.value;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        if cancelled {
            // the running totals lost their digits to a dominant panel
            total_error = heap.iter().map(|p| p.error).sum();
            total_value = heap.iter().map(|p| p.value).sum();
        }
    }
    // re-sum the panels so drift in the running totals does not leak out
    let mut value = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    for p in &panels {
        value.add(p.value);
        error.add(p.error);
    }
    let result = QuadratureResult {
        value: value.value(),
        error: error.value(),
        evaluations,
    };
    let panels = panels
        .into_iter()
        .map(|p| PanelValue {
            a: p.a,
            b: p.b,
            value: p.value,
        })
        .collect();
    Ok((result, panels))
}

/// A single 15-point Kronrod estimate of the integral over `[a, b]`.
pub fn kronrod15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> Result<f64, QuadratureError> {
    gk15(&mut f, a, b).map(|(v, _)| v)
}

/// Integrates over consecutive breakpoints, each segment adaptively with
/// an equal share of the absolute tolerance.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadratureOptions,
) -> Result<QuadratureResult, QuadratureError> {
    let segments = breaks.len().saturating_sub(1).max(1);
    let seg_opts = QuadratureOptions {
        abs_tol: opts.abs_tol / segments as f64,
        ..opts
    };
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], seg_opts)?;
        value.add(r.value);
        error += r.error;
        evaluations += r.evaluations;
    }
    Ok(QuadratureResult {
        value: value.value(),
        error,
        evaluations,
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, QuadratureOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let r = integrate(|x| (2.0 * PI * 20.0 * x).sin().powi(2), 0.0, 1.0, QuadratureOptions::absolute(1e-12))
            .unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_integrand_reports_failure() {
        let opts = QuadratureOptions {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 20,
        };
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, opts);
        assert!(matches!(r, Err(QuadratureError::ToleranceNotMet { .. })), "{r:?}");
    }

    #[test]
    fn panels_tile_the_interval() {
        let (r, panels) = integrate_panels(|x: f64| x.exp(), 0.0, 3.0, QuadratureOptions::absolute(1e-13)).unwrap();
        assert_eq!(panels.first().unwrap().a, 0.0);
        assert_eq!(panels.last().unwrap().b, 3.0);
        assert!(panels.windows(2).all(|w| w[0].b == w[1].a));
        let total: f64 = panels.iter().map(|p| p.value).sum();
        assert!((total - r.value).abs() < 1e-12);
        assert!((r.value - (3f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        for n in [1usize, 2, 5, 16, 31] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            // integral of x^(deg-1) over [-1,1], deg-1 even
            let exact = 2.0 / deg as f64;
            assert!((approx - exact).abs() < 1e-13, "n={n}");
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }
}
