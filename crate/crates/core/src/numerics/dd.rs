//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
//!
//! Only the handful of operations the map kernels need are provided. All of
//! them are built on the error-free transformations [`two_sum`] and
//! [`two_prod`], so a product like `L * sin(2 pi x)` with `L` around `2^40`
//! keeps roughly 100 bits of the result and its fractional part survives.

use std::ops::{Add, Mul, Neg, Sub};

/// `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Like [`two_sum`] but requires `|a| >= |b|` (or `a == 0`).
#[inline]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// `a * b = p + e` exactly (barring overflow/underflow).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };
    /// 2*pi to about 107 bits.
    pub const TWO_PI: DoubleDouble = DoubleDouble {
        hi: std::f64::consts::TAU,
        lo: 2.4492935982947064e-16,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Renormalizes an arbitrary pair.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        DoubleDouble { hi: p, lo: e }
    }

    /// Exact sum of two doubles.
    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (s, e) = two_sum(a, b);
        DoubleDouble { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, mut e) = two_prod(self.hi, b);
        e = self.lo.mul_add(b, e);
        let (h, l) = quick_two_sum(p, e);
        DoubleDouble { hi: h, lo: l }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, mut e) = two_sum(self.hi, b);
        e += self.lo;
        let (h, l) = quick_two_sum(s, e);
        DoubleDouble { hi: h, lo: l }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - DoubleDouble::from_prod(q1, b);
        let q2 = r.hi / b;
        let r = r - DoubleDouble::from_prod(q2, b);
        let q3 = r.hi / b;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble { hi: h, lo: l }.add_f64(q3)
    }

    pub fn recip(self) -> Self {
        let q1 = 1.0 / self.hi;
        let r = DoubleDouble::ONE - self * q1;
        let q2 = r.hi / self.hi;
        let r = r - self * q2;
        let q3 = r.hi / self.hi;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble { hi: h, lo: l }.add_f64(q3)
    }

    pub fn floor(self) -> Self {
        let fh = self.hi.floor();
        if fh == self.hi {
            DoubleDouble::new(fh, self.lo.floor())
        } else {
            DoubleDouble { hi: fh, lo: 0.0 }
        }
    }

    /// Rounds a value known to lie in `[0, 1)` to a double in `[0, 1)`;
    /// values within half an ulp of one wrap to zero.
    pub fn to_unit_f64(self) -> f64 {
        let v = self.to_f64();
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    /// Representative of `self mod 1` in `[0, 1)`, rounded to a double.
    pub fn frac(self) -> f64 {
        let r = (self - self.floor()).to_f64();
        if r >= 1.0 {
            0.0
        } else if r < 0.0 {
            // lo rounding can push an exact integer slightly below zero
            let w = r + 1.0;
            if w >= 1.0 {
                0.0
            } else {
                w
            }
        } else {
            r
        }
    }

    /// Representative of `self mod 1` in `[0, 1)`, kept in double-double.
    pub fn frac_dd(self) -> Self {
        let below_zero = |r: DoubleDouble| r.hi < 0.0 || (r.hi == 0.0 && r.lo < 0.0);
        let at_least_one = |r: DoubleDouble| r.hi > 1.0 || (r.hi == 1.0 && r.lo >= 0.0);
        let mut r = self - self.floor();
        if below_zero(r) {
            r = r.add_f64(1.0);
        }
        if at_least_one(r) {
            r = r.add_f64(-1.0);
        }
        if below_zero(r) || at_least_one(r) {
            DoubleDouble::ZERO
        } else {
            r
        }
    }

    pub fn div_dd(self, b: DoubleDouble) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble { hi: h, lo: l }.add_f64(q3)
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn add(self, b: DoubleDouble) -> Self {
        let (s, mut e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        e += t;
        let (s, mut e) = quick_two_sum(s, e);
        e += f;
        let (h, l) = quick_two_sum(s, e);
        DoubleDouble { hi: h, lo: l }
    }
}

impl Sub for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn sub(self, b: DoubleDouble) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn mul(self, b: DoubleDouble) -> Self {
        let (p, mut e) = two_prod(self.hi, b.hi);
        e += self.hi * b.lo + self.lo * b.hi;
        let (h, l) = quick_two_sum(p, e);
        DoubleDouble { hi: h, lo: l }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn mul(self, b: f64) -> Self {
        self.mul_f64(b)
    }
}

impl Add<f64> for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn add(self, b: f64) -> Self {
        self.add_f64(b)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn sub(self, b: f64) -> Self {
        self.add_f64(-b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_prod_is_exact() {
        let a = 1.0 + f64::EPSILON;
        let b = 1.0 - f64::EPSILON;
        let (p, e) = two_prod(a, b);
        // (1+u)(1-u) = 1 - u^2
        assert_eq!(p, 1.0);
        assert_eq!(e, -f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn frac_of_negative_is_in_unit_interval() {
        let x = DoubleDouble::new(-3.25, 0.0);
        assert_eq!(x.frac(), 0.75);
        let tiny_below = DoubleDouble::new(5.0, -1e-30);
        let r = tiny_below.frac();
        assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn division_recovers_the_dividend() {
        let third = DoubleDouble::ONE.div_f64(3.0);
        let back = third * 3.0 - DoubleDouble::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let r = DoubleDouble::from_f64(7.0).recip() * 7.0 - DoubleDouble::ONE;
        assert!(r.to_f64().abs() < 1e-31);
    }

    #[test]
    fn frac_dd_keeps_low_word() {
        let x = DoubleDouble::new(3.0, 1e-20);
        let f = x.frac_dd();
        assert_eq!(f.hi, 1e-20);
        let y = DoubleDouble::new(-2.0, 1e-20).frac_dd();
        assert_eq!(y.hi, 1e-20);
        let z = DoubleDouble::new(-2.0, -1e-20).frac_dd();
        assert!(z.hi == 1.0 && z.lo < 0.0);
    }

    #[test]
    fn dd_division() {
        let a = DoubleDouble::ONE.div_f64(7.0);
        let b = DoubleDouble::ONE.div_f64(3.0);
        let q = a.div_dd(b) * 7.0 - DoubleDouble::from_f64(3.0);
        assert!(q.to_f64().abs() < 1e-30);
    }

    #[test]
    fn large_product_keeps_its_fractional_part() {
        // 2^40 * (1/3) has fractional part 1/3 (2^40 = 1 mod 3)
        let third = DoubleDouble::ONE.div_f64(3.0);
        let p = third * 2f64.powi(40);
        assert!((p.frac() - 1.0 / 3.0).abs() < 1e-15);
    }
}
