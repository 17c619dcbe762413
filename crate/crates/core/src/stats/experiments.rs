//! Ensemble experiments: Birkhoff sums and the central limit theorem, decay
//! of correlations, and the diffusion limit of the slow-fast map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observable::Observable;
use super::rng::{sample_stream, uniform_pair};
use super::summary::SampleSummary;
use super::StatsError;
use crate::maps::{for_each_x_hat_f, for_each_x_standard_dd, MapParams, TorusPoint};
use crate::numerics::quadrature::{integrate, QuadratureOptions};
use crate::numerics::{pairwise_sum, CompensatedSum, DoubleDouble};

/// Above this value of `N L^{-1/4}` an experiment carries a warning.
pub const N14_WARNING: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: MapParams,
    /// Iterate count; `None` selects the experiment's default.
    pub n: Option<u64>,
    pub m: usize,
    pub seed: u64,
    pub phi: Observable,
    /// Range of the initial slow variable in the diffusion experiment.
    pub interval: (f64, f64),
}

impl ExperimentConfig {
    pub fn new(params: MapParams, m: usize, seed: u64) -> Self {
        ExperimentConfig {
            params,
            n: None,
            m,
            seed,
            phi: Observable::sin(),
            interval: (0.0, 1.0),
        }
    }
}

/// The result of an ensemble experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub n: u64,
    /// `N L^{-1/4}`.
    pub n14_ratio: f64,
    /// `epsilon sqrt(N)` for the diffusion experiment.
    pub scale: Option<f64>,
    pub summary: SampleSummary,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// `sum_{i < N} phi(x_i)` along the `hat F` orbit of `p0`, compensated.
///
/// ```
/// use stdmap_core::maps::TorusPoint;
/// use stdmap_core::stats::{birkhoff_sum, Observable};
/// let origin = TorusPoint::new(0.0, 0.0).unwrap();
/// assert_eq!(birkhoff_sum(origin, &Observable::sin(), 50, 1e3).unwrap(), 0.0);
/// ```
pub fn birkhoff_sum(p0: TorusPoint, phi: &Observable, n: u64, l: f64) -> Result<f64, StatsError> {
    if n == 0 {
        return Err(StatsError::InvalidConfig("N must be at least 1".into()));
    }
    let mut acc = CompensatedSum::new();
    for_each_x_hat_f(p0, l, n as usize - 1, |_, x| acc.add(phi.eval(x)));
    Ok(acc.value())
}

fn unit_integral(f: impl FnMut(f64) -> f64) -> Result<f64, StatsError> {
    let opts = QuadratureOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 1 << 14,
    };
    Ok(integrate(f, 0.0, 1.0, opts)?.value)
}

/// `int_0^1 phi dx` by quadrature.
pub fn mean_of_observable(phi: &Observable) -> Result<f64, StatsError> {
    unit_integral(|x| phi.eval(x))
}

/// `int_0^1 phi^2 dx` for a mean-zero `phi`.
///
/// ```
/// use stdmap_core::stats::{variance_of_observable, Observable};
/// assert!((variance_of_observable(&Observable::sin()).unwrap() - 0.5).abs() < 1e-12);
/// assert!(variance_of_observable(&Observable::constant(1.0)).is_err());
/// ```
pub fn variance_of_observable(phi: &Observable) -> Result<f64, StatsError> {
    let mean = mean_of_observable(phi)?;
    if mean.abs() > 1e-10 {
        return Err(StatsError::NotMeanZero { mean });
    }
    unit_integral(|x| phi.eval(x).powi(2))
}

fn n14_ratio(n: u64, l: f64) -> f64 {
    n as f64 * l.powf(-0.25)
}

fn n14_warning(ratio: f64, warnings: &mut Vec<String>) {
    if ratio > N14_WARNING {
        warnings.push(format!(
            "N L^-1/4 = {ratio:.3} exceeds {N14_WARNING}; the run is far from the asymptotic regime"
        ));
    }
}

/// Default iterate count for CLT runs, `floor(L^{1/5})`.
pub fn default_clt_iterates(l: f64) -> u64 {
    (l.powf(0.2).floor() as u64).max(1)
}

/// `S_N / sqrt(N)` for `M` uniform initial points, compared with
/// `N(0, int phi^2)`.
pub fn clt_experiment(cfg: &ExperimentConfig) -> Result<Experiment, StatsError> {
    if cfg.m == 0 {
        return Err(StatsError::EmptySample);
    }
    let l = cfg.params.l;
    let sigma2 = variance_of_observable(&cfg.phi)?;
    if sigma2 <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let n = cfg.n.unwrap_or_else(|| default_clt_iterates(l));
    let norm = (n as f64).sqrt();
    let samples: Vec<f64> = (0..cfg.m as u64)
        .into_par_iter()
        .map(|i| {
            let (x, y) = uniform_pair(cfg.seed, i);
            birkhoff_sum(TorusPoint::wrap(x, y), &cfg.phi, n, l).map(|s| s / norm)
        })
        .collect::<Result<_, _>>()?;
    let mut warnings = Vec::new();
    let ratio = n14_ratio(n, l);
    n14_warning(ratio, &mut warnings);
    Ok(Experiment {
        n,
        n14_ratio: ratio,
        scale: None,
        summary: SampleSummary::from_samples(&samples, sigma2)?,
        warnings,
        samples,
    })
}

/// `Z^N - Z` after `N = floor(epsilon^-2)` steps of the slow-fast map, for
/// `X` uniform on the circle and `Z` uniform on the configured interval.
///
/// The slow-fast map is conjugate to the standard map through
/// `y = epsilon^-(1+alpha) z mod 1`, and `Z^N - Z = epsilon sum_{i<N} sin(2 pi x_i)`
/// along the standard-map orbit of `(X, Y)`; only that orbit is computed.
pub fn diffusion_experiment(cfg: &ExperimentConfig) -> Result<Experiment, StatsError> {
    if cfg.m == 0 {
        return Err(StatsError::EmptySample);
    }
    let (Some(eps), Some(alpha)) = (cfg.params.epsilon, cfg.params.alpha) else {
        return Err(StatsError::InvalidConfig("the diffusion experiment needs epsilon and alpha".into()));
    };
    let (a, b) = cfg.interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(StatsError::InvalidConfig(format!("interval [{a}, {b}] is empty")));
    }
    let l = cfg.params.l;
    let shear = DoubleDouble::from_f64(l).div_f64(eps);
    let n_eps = diffusion_iterates(eps);
    let mut warnings = Vec::new();
    let n = match cfg.n {
        Some(n) if n != n_eps => {
            warnings.push(format!("N = {n} overrides floor(epsilon^-2) = {n_eps}"));
            n
        }
        _ => n_eps,
    };
    if n == 0 {
        return Err(StatsError::InvalidConfig("N must be at least 1".into()));
    }
    if alpha <= 8.0 {
        warnings.push(format!("alpha = {alpha} <= 8 lies outside the regime of the limit theorem"));
    }
    let samples: Vec<f64> = (0..cfg.m as u64)
        .into_par_iter()
        .map(|i| {
            let (u, v) = uniform_pair(cfg.seed, i);
            let z = a + (b - a) * v;
            let y = (shear * z).frac_dd();
            let mut acc = CompensatedSum::new();
            for_each_x_standard_dd(u, y, l, n as usize - 1, |_, x| acc.add(cfg.phi.eval(x)));
            eps * acc.value()
        })
        .collect();
    let ratio = n14_ratio(n, l);
    n14_warning(ratio, &mut warnings);
    Ok(Experiment {
        n,
        n14_ratio: ratio,
        scale: Some(eps * (n as f64).sqrt()),
        summary: SampleSummary::from_samples(&samples, 0.5)?,
        warnings,
        samples,
    })
}

/// `floor(epsilon^-2)`, with `epsilon` read as the decimal it was written as:
/// a relative allowance of `1e-12` keeps `0.1` from producing `99`.
///
/// ```
/// use stdmap_core::stats::diffusion_iterates;
/// assert_eq!(diffusion_iterates(0.1), 100);
/// assert_eq!(diffusion_iterates(0.05), 400);
/// assert_eq!(diffusion_iterates(0.3), 11);
/// ```
pub fn diffusion_iterates(eps: f64) -> u64 {
    (eps.powi(-2) * (1.0 + 1e-12)).floor() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    MonteCarlo { m: usize },
    /// `m_x` stratified horizontal positions, each averaged over a shifted
    /// uniform grid of `k` vertical positions.
    YGridHybrid { m_x: usize, k: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub n: u64,
    pub l: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub method: CorrelationMethod,
    /// `(n - 1) L^{-3/4} + L^{-1/2}`.
    pub bound_value: f64,
}

pub fn correlation_bound(n: u64, l: f64) -> f64 {
    (n as f64 - 1.0) * l.powf(-0.75) + l.powf(-0.5)
}

fn x_after(x: f64, y: f64, l: f64, n: u64) -> f64 {
    let mut last = x;
    for_each_x_hat_f(TorusPoint::wrap(x, y), l, n as usize, |_, xi| last = xi);
    last
}

/// Estimates `int psi . phi o F^n - int phi int psi` over Lebesgue measure.
pub fn correlation(
    phi: &Observable,
    psi: &Observable,
    n: u64,
    l: f64,
    method: CorrelationMethod,
    seed: u64,
) -> Result<CorrelationResult, StatsError> {
    if n == 0 {
        return Err(StatsError::InvalidConfig("the lag must be at least 1".into()));
    }
    let product_of_means = mean_of_observable(phi)? * mean_of_observable(psi)?;
    let values: Vec<f64> = match method {
        CorrelationMethod::MonteCarlo { m } => {
            if m < 2 {
                return Err(StatsError::InvalidConfig("Monte Carlo needs at least two points".into()));
            }
            (0..m as u64)
                .into_par_iter()
                .map(|i| {
                    let (x, y) = uniform_pair(seed, i);
                    psi.eval(x) * phi.eval(x_after(x, y, l, n)) - product_of_means
                })
                .collect()
        }
        CorrelationMethod::YGridHybrid { m_x, k } => {
            if m_x < 2 || k < 2 {
                return Err(StatsError::InvalidConfig("the hybrid grid needs m_x >= 2 and k >= 2".into()));
            }
            (0..m_x as u64)
                .into_par_iter()
                .map(|j| {
                    use rand::Rng;
                    let mut rng = sample_stream(seed, j);
                    let x = (j as f64 + rng.random::<f64>()) / m_x as f64;
                    let offset = rng.random::<f64>();
                    let row: Vec<f64> = (0..k)
                        .map(|q| phi.eval(x_after(x, (q as f64 + offset) / k as f64, l, n)))
                        .collect();
                    psi.eval(x) * (pairwise_sum(&row) / k as f64) - product_of_means
                })
                .collect()
        }
    };
    let m = values.len() as f64;
    let estimate = pairwise_sum(&values) / m;
    let dev: Vec<f64> = values.iter().map(|v| (v - estimate).powi(2)).collect();
    let stderr = (pairwise_sum(&dev) / (m - 1.0) / m).sqrt();
    Ok(CorrelationResult {
        n,
        l,
        estimate,
        stderr,
        method,
        bound_value: correlation_bound(n, l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn birkhoff_trivial_cases() {
        let p = TorusPoint::new(0.3, 0.7).unwrap();
        assert_eq!(birkhoff_sum(p, &Observable::constant(2.0), 17, 1e4).unwrap(), 34.0);
        assert_eq!(birkhoff_sum(p, &Observable::sin(), 1, 1e4).unwrap(), Observable::sin().eval(0.3));
        assert!(birkhoff_sum(p, &Observable::sin(), 0, 1e4).is_err());
    }

    #[test]
    fn birkhoff_sum_follows_the_standard_map_orbit() {
        use crate::maps::{conjugate, step_standard};
        let (l, n) = (1e3, 3);
        let p = TorusPoint::new(0.123, 0.456).unwrap();
        // the x-orbit of hat F from p is the x-orbit of F_L from the conjugate point
        let mut q = conjugate(p);
        let mut direct = 0.0;
        for _ in 0..n {
            direct += Observable::sin().eval(q.x());
            q = step_standard(q, l);
        }
        let s = birkhoff_sum(p, &Observable::sin(), n, l).unwrap();
        assert!((s - direct).abs() < 1e-7, "{s} vs {direct}");
    }

    #[test]
    fn variances() {
        let two = Observable::from_coefficients("t", "1 0 1\n2 1 0").unwrap();
        assert!((variance_of_observable(&two).unwrap() - 1.0).abs() < 1e-12);
        assert!((variance_of_observable(&Observable::cos()).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            variance_of_observable(&Observable::from_coefficients("t", "0 0.01 0\n1 1 0").unwrap()),
            Err(StatsError::NotMeanZero { .. })
        ));
    }

    #[test]
    fn clt_defaults_and_warnings() {
        assert_eq!(default_clt_iterates(1e6), 15);
        let mut cfg = ExperimentConfig::new(MapParams::from_l(1e6).unwrap(), 2000, 1);
        let e = clt_experiment(&cfg).unwrap();
        assert_eq!(e.n, 15);
        assert!(e.warnings.is_empty());
        assert_eq!(e.summary.m, 2000);
        cfg.n = Some(100);
        assert!(!clt_experiment(&cfg).unwrap().warnings.is_empty());
        cfg.m = 1;
        assert!(clt_experiment(&cfg).unwrap().summary.ks >= 0.5 - 1e-12);
        cfg.phi = Observable::constant(1.0);
        assert!(clt_experiment(&cfg).is_err());
    }

    #[test]
    fn clt_is_reproducible_across_thread_counts() {
        let cfg = ExperimentConfig::new(MapParams::from_l(1e5).unwrap(), 5000, 9);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| clt_experiment(&cfg)).unwrap();
        let b = clt_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn diffusion_iterate_count_and_scale() {
        let mut cfg = ExperimentConfig::new(MapParams::from_epsilon_alpha(0.1, 9.0).unwrap(), 200, 3);
        let e = diffusion_experiment(&cfg).unwrap();
        assert_eq!(e.n, 100);
        let s = e.scale.unwrap();
        assert!((1.0 - 0.01..=1.0).contains(&s));
        // N L^-1/4 = 100 / 10^(9/4) is just above the warning level
        assert_eq!(e.warnings.len(), 1);
        assert!(e.warnings[0].contains("L^-1/4"));
        cfg.params = MapParams::from_epsilon_alpha(0.1, 2.0).unwrap();
        assert!(diffusion_experiment(&cfg).unwrap().warnings.iter().any(|w| w.contains("alpha")));
        cfg.params = MapParams::from_l(1e3).unwrap();
        assert!(diffusion_experiment(&cfg).is_err());
    }

    #[test]
    fn diffusion_matches_the_raw_slow_fast_map() {
        use crate::maps::{step_slowfast, CylinderState};
        // small shear so that raw iteration is accurate
        let params = MapParams::from_epsilon_alpha(0.25, 2.0).unwrap();
        let mut cfg = ExperimentConfig::new(params, 50, 4);
        cfg.interval = (-0.3, 0.7);
        // orbits separate by a factor of about 100 per step
        cfg.n = Some(3);
        let e = diffusion_experiment(&cfg).unwrap();
        for i in 0..50u64 {
            let (u, v) = uniform_pair(4, i);
            let z0 = -0.3 + v;
            let mut s = CylinderState::new(u, z0).unwrap();
            for _ in 0..e.n {
                s = step_slowfast(s, &params).unwrap();
            }
            assert!((s.z - z0 - e.samples[i as usize]).abs() < 1e-9);
        }
    }

    #[test]
    fn one_step_hybrid_correlation_vanishes() {
        for l in [1e2, 1e3, 1e5, 1e8] {
            for (phi, psi) in [
                (Observable::sin(), Observable::sin()),
                (Observable::cos(), Observable::fourier(3)),
                (Observable::fourier(2), Observable::cos()),
            ] {
                let r = correlation(&phi, &psi, 1, l, CorrelationMethod::YGridHybrid { m_x: 500, k: 16 }, 1).unwrap();
                assert!(r.estimate.abs() <= 1e-12, "L = {l}: {}", r.estimate);
            }
        }
    }

    #[test]
    fn constants_are_uncorrelated() {
        let r = correlation(
            &Observable::constant(1.0),
            &Observable::sin(),
            3,
            1e3,
            CorrelationMethod::MonteCarlo { m: 20_000 },
            2,
        )
        .unwrap();
        assert!(r.stderr > 0.0);
        assert!(r.estimate.abs() <= 4.0 * r.stderr);
        assert_eq!(r.bound_value, correlation_bound(3, 1e3));
        assert_eq!(correlation_bound(1, 1e4), 0.01);
    }

    #[test]
    fn monte_carlo_stderr_scales_like_inverse_square_root() {
        let run = |m| {
            correlation(&Observable::sin(), &Observable::sin(), 2, 1e3, CorrelationMethod::MonteCarlo { m }, 8)
                .unwrap()
                .stderr
        };
        let ratio = run(10_000) / run(160_000);
        assert!((ratio - 4.0).abs() <= 0.8, "{ratio}");
    }
}
