//! Double-double arithmetic (about 31 significant digits) for re-evaluating the
//! closed-form bounds independently of the `f64` implementations.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
    pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
    pub const E: Dd = Dd { hi: std::f64::consts::E, lo: 1.4456468917292502e-16 };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact ratio of two integers (up to rounding of the final division).
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_f64(num as f64) / Self::from_f64(den as f64)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn scale(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::ZERO } else { Self::from_f64(f64::NAN) };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = Self::from_f64(self.hi * x);
        let (p, e) = two_prod(ax.hi, ax.hi);
        let diff = self - Self { hi: p, lo: e };
        ax + Self::from_f64(diff.hi * (x * 0.5))
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        let k = (self.hi / Self::LN2.hi).round();
        // r = (x − k ln 2)/2^10, |r| ≤ 3.4e-4
        let r = (self - Self::LN2 * Self::from_f64(k)).scale(-10);
        let mut term = r;
        let mut sum = r;
        let mut i = 2.0;
        while term.hi.abs() > 1e-36 * sum.hi.abs().max(1e-300) {
            term = term * r / Self::from_f64(i);
            sum = sum + term;
            i += 1.0;
        }
        // exp(r) − 1 is squared up via (1 + s)² − 1 = s(2 + s) to keep accuracy.
        for _ in 0..10 {
            sum = sum * (sum + Self::from_f64(2.0));
        }
        (sum + Self::ONE).scale(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let mut x = Self::from_f64(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Self::ONE;
        }
        x
    }

    /// `self^y` for `self > 0`.
    pub fn powd(self, y: Dd) -> Self {
        (y * self.ln()).exp()
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (s, e) = quick_two_sum(hi, self.lo.floor());
            Self { hi: s, lo: e }
        } else {
            Self::from_f64(hi)
        }
    }

    pub fn max(self, other: Dd) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl From<u64> for Dd {
    fn from(x: u64) -> Self {
        let hi = x as f64;
        // x − hi is exact in i128 and fits in an f64 exactly (|x − hi| < 2^11).
        let lo = (x as i128 - hi as i128) as f64;
        let (s, e) = quick_two_sum(hi, lo);
        Self { hi: s, lo: e }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, y: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, y: Dd) -> Dd {
        self + (-y)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, y: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, y.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * y.lo + self.lo * y.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, y: Dd) -> Dd {
        let q1 = self.hi / y.hi;
        let r = self - y * Dd::from_f64(q1);
        let q2 = r.hi / y.hi;
        let r = r - y * Dd::from_f64(q2);
        let q3 = r.hi / y.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Dd, b: Dd) -> f64 {
        ((a - b).to_f64() / b.to_f64()).abs()
    }

    // References: mpmath at 50 digits, split into (hi, lo) pairs.
    #[test]
    fn elementary_functions_match_reference() {
        let cases = [
            (Dd::from(2.0).sqrt(), Dd::new(std::f64::consts::SQRT_2, -9.667293313452913e-17)),
            (Dd::from(0.7).exp(), Dd::new(2.0137527074704766, -2.0058243549764793e-16)),
            (Dd::from(3.0).ln(), Dd::new(1.0986122886681098, -9.07129723500153e-17)),
            (Dd::from(1024.0).powd(Dd::from(0.3)), Dd::new(7.999999999999999, 2.7254005225079566e-16)),
            (Dd::from(-40.5).exp(), Dd::new(2.576757109154981e-18, -9.514389375594685e-35)),
            (Dd::from(1e-3).ln(), Dd::new(-6.907755278982137, -2.1613487097372872e-16)),
        ];
        for (i, (got, want)) in cases.iter().enumerate() {
            assert!(rel(*got, *want) < 1e-30, "case {i}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn constants_are_consistent() {
        assert!(rel(Dd::ONE.exp(), Dd::E) < 1e-31);
        assert!(rel(Dd::from(2.0).ln(), Dd::LN2) < 1e-31);
        assert!(rel(Dd::from(0.5).exp().sqr(), Dd::E) < 1e-31);
    }

    #[test]
    fn arithmetic_identities() {
        let third = Dd::ONE / Dd::from(3.0);
        assert!(rel(third * Dd::from(3.0), Dd::ONE) < 1e-31);
        let x = Dd::from(1.0 + 1e-10);
        assert!(rel(x.ln().exp(), x) < 1e-30);
        assert_eq!(Dd::new(5.0, -1e-20).floor(), Dd::from(4.0));
        assert_eq!(Dd::new(5.5, 0.0).floor(), Dd::from(5.0));
        assert_eq!(Dd::from(u64::MAX).hi, 18446744073709551616.0);
        assert_eq!(Dd::from(u64::MAX).lo, -1.0);
    }
}
