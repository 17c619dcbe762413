//! Floating-point building blocks shared by every module.

pub mod dd;
pub mod quadrature;
pub mod sum;
pub mod trig;

pub use dd::DoubleDouble;
pub use quadrature::{
    gauss_legendre, integrate, integrate_panels, integrate_with_breaks, kronrod15, PanelValue, QuadratureError,
    QuadratureOptions, QuadratureResult,
};
pub use sum::{compensated_sum, pairwise_sum, CompensatedSum};
pub use trig::{cos_2pi, sin_2pi, sin_2pi_dd, sin_2pi_of_dd, sincos_2pi_dd};

/// Representative of `x mod 1` in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::frac;

    #[test]
    fn frac_handles_negatives_and_rounding() {
        assert_eq!(frac(-0.3), 1.0 - 0.3);
        assert_eq!(frac(2.0), 0.0);
        // -1e-20 + 1 rounds to 1, which must fold back to 0
        assert_eq!(frac(-1e-20), 0.0);
    }
}
