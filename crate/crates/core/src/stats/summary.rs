//! Sample summaries and the Kolmogorov-Smirnov distance.

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::numerics::pairwise_sum;

/// `P(X <= x)` for `X ~ N(mean, variance)`.
///
/// ```
/// use stdmap_core::stats::gaussian_cdf;
/// assert_eq!(gaussian_cdf(0.0, 0.0, 0.5), 0.5);
/// assert!((gaussian_cdf(1.0, 0.0, 1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
/// ```
pub fn gaussian_cdf(x: f64, mean: f64, variance: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (2.0 * variance).sqrt())
}

/// `sup_x |F_M(x) - F(x)|` for the empirical distribution `F_M` of `samples`.
///
/// The supremum is attained at a sample point, approached from the left or
/// the right; `cdf_left(x)` is `P(X < x)`, which differs from `cdf(x)` only
/// when the reference has an atom at `x`.
pub fn ks_statistic_with(
    samples: &[f64],
    cdf: impl Fn(f64) -> f64,
    cdf_left: impl Fn(f64) -> f64,
) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(StatsError::InvalidConfig("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        // the empirical CDF jumps from i/m to j/m at x
        d = d.max((cdf_left(x) - i as f64 / m).abs());
        d = d.max((j as f64 / m - cdf(x)).abs());
        i = j;
    }
    Ok(d.min(1.0))
}

/// [`ks_statistic_with`] for a continuous reference.
///
/// ```
/// use stdmap_core::stats::{gaussian_cdf, ks_statistic};
/// let d = ks_statistic(&[0.0], |x| gaussian_cdf(x, 0.0, 1.0)).unwrap();
/// assert_eq!(d, 0.5);
/// ```
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, StatsError> {
    ks_statistic_with(samples, &cdf, &cdf)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub m: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Distance to `N(0, reference_variance)`.
    pub ks: f64,
    pub reference_variance: f64,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
}

impl SampleSummary {
    /// Moments by pairwise summation in sample order, so the result does not
    /// depend on thread scheduling.
    pub fn from_samples(samples: &[f64], reference_variance: f64) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::EmptySample);
        }
        let m = samples.len();
        let mf = m as f64;
        let mean = pairwise_sum(samples) / mf;
        let dev = |p: i32| pairwise_sum(&samples.iter().map(|v| (v - mean).powi(p)).collect::<Vec<_>>()) / mf;
        let m2 = dev(2);
        let m3 = dev(3);
        let m4 = dev(4);
        let variance = if m > 1 { m2 * mf / (mf - 1.0) } else { 0.0 };
        let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
        let ks = ks_statistic(samples, |x| gaussian_cdf(x, 0.0, reference_variance))?;
        Ok(SampleSummary {
            m,
            mean,
            variance,
            skewness,
            ks,
            reference_variance,
            stderr_mean: (variance / mf).sqrt(),
            stderr_variance: ((m4 - m2 * m2).max(0.0) / mf).sqrt(),
        })
    }
}
