//! Double-double arithmetic (about 32 significant decimal digits).
//!
//! Used wherever a floor or a phase mod 1 must be certified: `j^α` for
//! Piatetski-Shapiro floors and `h j^α / t` for exponential-sum phases.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DD = DD { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_3e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
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

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    /// Exact for |n| < 2^106.
    pub fn from_i128(n: i128) -> DD {
        let hi = n as f64;
        let rest = n - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rest as f64);
        DD { hi, lo }
    }

    pub fn from_u128(n: u128) -> DD {
        if n <= i128::MAX as u128 {
            DD::from_i128(n as i128)
        } else {
            DD::from_f64(n as f64)
        }
    }

    pub fn ratio(p: i128, q: i128) -> DD {
        DD::from_i128(p) / DD::from_i128(q)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn floor(self) -> DD {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            DD { hi, lo }
        } else {
            DD { hi, lo: 0.0 }
        }
    }

    /// Fractional part in [0, 1).
    pub fn fract(self) -> DD {
        let f = self - self.floor();
        if f.hi >= 1.0 {
            f - DD::ONE
        } else if f.hi < 0.0 {
            f + DD::ONE
        } else {
            f
        }
    }

    pub fn mul_pow2(self, e: i32) -> DD {
        let s = 2f64.powi(e);
        DD { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn exp(self) -> DD {
        if self.hi > 709.0 {
            return DD::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DD::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * DD::from_f64(k)).mul_pow2(-10);
        // Taylor series of e^r - 1; |r| < 3.5e-4 so 12 terms exceed the precision.
        let mut term = r;
        let mut s = r;
        for n in 2..=12 {
            term = term * r / DD::from_f64(n as f64);
            s = s + term;
        }
        for _ in 0..10 {
            s = s.mul_pow2(1) + s * s;
        }
        (s + DD::ONE).mul_pow2(k as i32)
    }

    pub fn ln(self) -> DD {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let mut y = DD::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - DD::ONE;
        }
        y
    }

    /// `self^e` for positive `self`.
    pub fn powdd(self, e: DD) -> DD {
        (e * self.ln()).exp()
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b * DD::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DD::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from_f64(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: DD, b: DD) -> f64 {
        ((a - b).to_f64() / b.to_f64()).abs()
    }

    #[test]
    fn arithmetic_is_double_double_accurate() {
        let third = DD::ratio(1, 3);
        let back = third * DD::from_f64(3.0);
        assert!(rel(back, DD::ONE) < 1e-31);
        let big = DD::from_i128((1i128 << 100) + 12345);
        assert_eq!((big - DD::from_i128(1i128 << 100)).to_f64(), 12345.0);
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[1e-3, 0.5, 1.0, 2.0, 10.0, 12345.678, 1e15] {
            let d = DD::from_f64(x);
            assert!(rel(d.ln().exp(), d) < 1e-30, "x = {x}");
        }
        assert!(rel(DD::ONE.exp(), DD { hi: std::f64::consts::E, lo: 1.445_646_891_729_250_2e-16 }) < 1e-31);
    }

    #[test]
    fn rational_powers_square_back_exactly() {
        let a = DD::ratio(3, 2);
        for j in [2i128, 3, 7, 1000, 123_457, 10_000_019] {
            let y = DD::from_i128(j).powdd(a);
            let cube = DD::from_i128(j * j * j);
            assert!(rel(y * y, cube) < 1e-29, "j = {j}");
        }
    }

    #[test]
    fn fract_of_large_values() {
        let x = DD::from_i128(1i128 << 70) + DD::from_f64(0.25);
        assert_eq!(x.fract().to_f64(), 0.25);
        let y = DD::from_f64(-2.75);
        assert_eq!(y.fract().to_f64(), 0.25);
    }
}
