//! `sin(2 pi x)` and `cos(2 pi x)` in double-double precision.
//!
//! The argument is reduced modulo one exactly (`x - round(x)` is exact in
//! binary floating point), split as `k/256 + r` with `|r| <= 1/512`, and the
//! two pieces are recombined with the angle-addition formulas. Multiples of
//! a quarter turn hit table entries exactly, so `sin(2 pi x)` is an exact
//! zero at `x in {0, 1/2}` and `cos(2 pi x)` at `x in {1/4, 3/4}`.

use std::sync::OnceLock;

use super::dd::DoubleDouble;

const TABLE_STEPS: usize = 256;
const QUARTER: usize = TABLE_STEPS / 4;

/// sin/cos of `2 pi j / 256` for `j = 0..=64`.
fn base_table() -> &'static [(DoubleDouble, DoubleDouble); QUARTER + 1] {
    static TABLE: OnceLock<[(DoubleDouble, DoubleDouble); QUARTER + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [(DoubleDouble::ZERO, DoubleDouble::ONE); QUARTER + 1];
        for (j, slot) in table.iter_mut().enumerate().skip(1) {
            if j == QUARTER {
                *slot = (DoubleDouble::ONE, DoubleDouble::ZERO);
                continue;
            }
            let theta = DoubleDouble::TWO_PI.mul_f64(j as f64 / TABLE_STEPS as f64);
            *slot = taylor_sincos(theta, 1e-34);
        }
        table
    })
}

/// Plain Taylor series, used only to build the table.
fn taylor_sincos(theta: DoubleDouble, tol: f64) -> (DoubleDouble, DoubleDouble) {
    let t2 = theta * theta;
    let mut sin = theta;
    let mut cos = DoubleDouble::ONE;
    let mut s_term = theta;
    let mut c_term = DoubleDouble::ONE;
    let mut n = 1.0;
    loop {
        s_term = -(s_term * t2).div_f64((n + 1.0) * (n + 2.0));
        c_term = -(c_term * t2).div_f64(n * (n + 1.0));
        sin = sin + s_term;
        cos = cos + c_term;
        n += 2.0;
        if s_term.hi.abs() < tol && c_term.hi.abs() < tol {
            break;
        }
    }
    (sin, cos)
}

/// Short Taylor polynomial for `|b| <= pi/256`.
#[inline]
fn small_sincos(b: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    const INV_FACT: [f64; 7] = [
        1.0 / 6.0,
        1.0 / 120.0,
        1.0 / 5040.0,
        1.0 / 362880.0,
        1.0 / 39916800.0,
        1.0 / 6227020800.0,
        1.0 / 1307674368000.0,
    ];
    const INV_FACT_EVEN: [f64; 7] = [
        1.0 / 2.0,
        1.0 / 24.0,
        1.0 / 720.0,
        1.0 / 40320.0,
        1.0 / 3628800.0,
        1.0 / 479001600.0,
        1.0 / 87178291200.0,
    ];
    let b2 = b * b;
    // leading coefficients need full double-double accuracy
    const SIXTH: DoubleDouble = DoubleDouble { hi: 0.16666666666666666, lo: 9.25185853854297e-18 };
    const INV120: DoubleDouble = DoubleDouble { hi: 0.008333333333333333, lo: 1.1564823173178714e-19 };
    const HALF: DoubleDouble = DoubleDouble { hi: 0.5, lo: 0.0 };
    const INV24: DoubleDouble = DoubleDouble { hi: 0.041666666666666664, lo: 2.3129646346357427e-18 };

    // sin: b * (1 - b2/6 + b2^2/120 - b2^3/5040 + ...)
    let mut ps = DoubleDouble::from_f64(INV_FACT[5]);
    for &c in INV_FACT[2..5].iter().rev() {
        ps = DoubleDouble::from_f64(c) - b2 * ps;
    }
    ps = INV120 - b2 * ps;
    ps = SIXTH - b2 * ps;
    let sin = b - b * b2 * ps;

    // cos: 1 - b2/2 + b2^2/24 - ...
    let mut pc = DoubleDouble::from_f64(INV_FACT_EVEN[6]);
    for &c in INV_FACT_EVEN[2..6].iter().rev() {
        pc = DoubleDouble::from_f64(c) - b2 * pc;
    }
    pc = INV24 - b2 * pc;
    pc = HALF - b2 * pc;
    let cos = DoubleDouble::ONE - b2 * pc;
    (sin, cos)
}

/// Table lookup for `k in [-128, 128]`, i.e. angle `2 pi k / 256`.
#[inline]
fn table_sincos(k: i64) -> (DoubleDouble, DoubleDouble) {
    let m = k.rem_euclid(TABLE_STEPS as i64) as usize;
    let (q, j) = (m / QUARTER, m % QUARTER);
    let (s, c) = base_table()[j];
    match q {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Returns `(sin(2 pi x), cos(2 pi x))` with roughly 100 correct bits.
pub fn sincos_2pi_dd(x: f64) -> (DoubleDouble, DoubleDouble) {
    if !x.is_finite() {
        return (DoubleDouble::from_f64(f64::NAN), DoubleDouble::from_f64(f64::NAN));
    }
    let t = x - x.round(); // exact, t in [-1/2, 1/2]
    let scaled = t * TABLE_STEPS as f64; // exact
    let k = scaled.round();
    let r = (scaled - k) / TABLE_STEPS as f64; // exact, |r| <= 1/512
    let (sa, ca) = table_sincos(k as i64);
    if r == 0.0 {
        return (sa, ca);
    }
    let b = DoubleDouble::TWO_PI.mul_f64(r);
    let (sb, cb) = small_sincos(b);
    let sin = sa * cb + ca * sb;
    let cos = ca * cb - sa * sb;
    (sin, cos)
}

/// `sin(2 pi x)` as a double-double.
#[inline]
pub fn sin_2pi_dd(x: f64) -> DoubleDouble {
    sincos_2pi_dd(x).0
}

/// `sin(2 pi x)` for an argument carried as a double-double.
///
/// First-order correction in `x.lo`; the dropped term is `O(x.lo^2)`,
/// far below the double-double resolution.
pub fn sin_2pi_of_dd(x: DoubleDouble) -> DoubleDouble {
    let (s, c) = sincos_2pi_dd(x.hi);
    if x.lo == 0.0 {
        return s;
    }
    let shift = DoubleDouble::TWO_PI.mul_f64(x.lo);
    s + c * shift
}

/// `sin(2 pi x)` rounded to a double, exact zeros at half-integers.
#[inline]
pub fn sin_2pi(x: f64) -> f64 {
    sincos_2pi_dd(x).0.to_f64()
}

/// `cos(2 pi x)` rounded to a double, exact zeros at quarter-odd points.
#[inline]
pub fn cos_2pi(x: f64) -> f64 {
    sincos_2pi_dd(x).1.to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_zeros_and_ones() {
        assert_eq!(sin_2pi(0.0), 0.0);
        assert_eq!(sin_2pi(0.5), 0.0);
        assert_eq!(sin_2pi(-0.5), 0.0);
        assert_eq!(sin_2pi(7.0), 0.0);
        assert_eq!(sin_2pi(0.25), 1.0);
        assert_eq!(sin_2pi(0.75), -1.0);
        assert_eq!(cos_2pi(0.25), 0.0);
        assert_eq!(cos_2pi(0.75), 0.0);
        assert_eq!(cos_2pi(0.0), 1.0);
    }

    #[test]
    fn agrees_with_libm_to_a_few_ulp() {
        let mut x = -3.0;
        while x < 3.0 {
            let (s, c) = sincos_2pi_dd(x);
            let arg = 2.0 * std::f64::consts::PI * (x - x.round());
            assert!((s.to_f64() - arg.sin()).abs() < 4e-16, "sin at {x}");
            assert!((c.to_f64() - arg.cos()).abs() < 4e-16, "cos at {x}");
            x += 0.000_731;
        }
    }

    #[test]
    fn pythagorean_identity_in_double_double() {
        for i in 0..2000 {
            let x = (i as f64 * 0.618_033_988_749_894_9).fract() - 0.5;
            let (s, c) = sincos_2pi_dd(x);
            let one = s * s + c * c - DoubleDouble::ONE;
            assert!(one.to_f64().abs() < 1e-30, "x = {x}: {:e}", one.to_f64());
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn matches_high_precision_reference() {
        // (x, sin hi, sin lo, cos hi, cos lo) from 200-bit arithmetic
        let cases: [(f64, f64, f64, f64, f64); 6] = [
            (0.1, 0.5877852522924731, 2.0282698052150037e-17, 0.8090169943749475, -4.766175266906226e-17),
            (0.123456789, 0.700217342727619, -1.8395678228398805e-17, 0.7139297395006543, 4.157588980899511e-18),
            (1e-5, 6.283185303045417e-05, -2.7676898201513517e-21, 0.9999999980260791, 3.604151650195936e-17),
            (0.2499999, 0.9999999999998026, 5.565745219873127e-18, 6.28318530735985e-07, 3.519025626900507e-23),
            (0.7071067811865476, -0.9639025328498774, -4.1893235279053886e-17, -0.2662553420414152, 1.4687193418170823e-17),
            (12345.678, -0.8994052515660513, 2.740636902156821e-17, -0.4371157666515908, 1.5565242458983112e-17),
        ];
        for (x, sh, sl, ch, cl) in cases {
            let (s, c) = sincos_2pi_dd(x);
            let ds = (s - DoubleDouble::new(sh, sl)).to_f64();
            let dc = (c - DoubleDouble::new(ch, cl)).to_f64();
            assert!(ds.abs() < 1e-30, "sin({x}) off by {ds:e}");
            assert!(dc.abs() < 1e-30, "cos({x}) off by {dc:e}");
        }
    }
}
