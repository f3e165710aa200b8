//! Integer number theory helpers and deterministic floating-point accumulators.

use crate::error::{bail, Result};

pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn gcd_i128(a: i128, b: i128) -> u128 {
    gcd_u128(a.unsigned_abs(), b.unsigned_abs())
}

/// Trial-division limit: moduli up to 10^12 factor with at most 10^6 divisions.
pub const FACTOR_LIMIT: u128 = 1_000_000_000_000;

/// Prime factorization by trial division, `(p, e)` pairs in ascending `p`.
pub fn factorize(n: u128) -> Result<Vec<(u128, u32)>> {
    if n == 0 {
        bail!(Domain, "cannot factor 0");
    }
    if n > FACTOR_LIMIT {
        bail!(Capacity, "modulus {n} exceeds trial-division limit {FACTOR_LIMIT}");
    }
    let mut out = Vec::new();
    let mut m = n;
    let mut push = |p: u128, m: &mut u128| {
        let mut e = 0;
        while (*m).is_multiple_of(p) {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5;
    while p * p <= m {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        out.push((m, 1));
    }
    Ok(out)
}

pub fn euler_phi(n: u128) -> Result<u128> {
    let mut phi = n;
    for (p, _) in factorize(n)? {
        phi = phi / p * (p - 1);
    }
    Ok(phi)
}

/// All divisors of `n` in ascending order together with μ(d).
pub fn divisors_with_mobius(n: u128) -> Result<Vec<(u128, i8)>> {
    let fac = factorize(n)?;
    let mut divs: Vec<(u128, i8)> = vec![(1, 1)];
    for (p, e) in fac {
        let len = divs.len();
        let mut pk = 1u128;
        for k in 1..=e {
            pk *= p;
            for i in 0..len {
                let (d, mu) = divs[i];
                let mu = if k == 1 { -mu } else { 0 };
                divs.push((d * pk, mu));
            }
        }
    }
    divs.sort_unstable_by_key(|&(d, _)| d);
    Ok(divs)
}

pub fn divisors(n: u128) -> Result<Vec<u128>> {
    Ok(divisors_with_mobius(n)?.into_iter().map(|(d, _)| d).collect())
}

/// Floor of the square root of `n`.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Exact fixed-point accumulator for non-negative binary64 terms.
///
/// Every term is scaled by 2^64 and rounded once; terms >= 2^-11 convert
/// exactly, so the total is the exact sum of the inputs and does not depend
/// on the order of addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FixedSum(pub i128);

const FIXED_SCALE: f64 = 18446744073709551616.0; // 2^64

impl FixedSum {
    pub fn zero() -> Self {
        FixedSum(0)
    }

    pub fn term(v: f64) -> Self {
        FixedSum((v * FIXED_SCALE).round() as i128)
    }

    pub fn add(&mut self, v: f64) {
        self.0 += Self::term(v).0;
    }

    pub fn add_fixed(&mut self, other: FixedSum) {
        self.0 += other.0;
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / FIXED_SCALE
    }
}

impl std::ops::Add for FixedSum {
    type Output = FixedSum;
    fn add(self, rhs: FixedSum) -> FixedSum {
        FixedSum(self.0 + rhs.0)
    }
}

impl std::ops::Sub for FixedSum {
    type Output = FixedSum;
    fn sub(self, rhs: FixedSum) -> FixedSum {
        FixedSum(self.0 - rhs.0)
    }
}

impl std::iter::Sum for FixedSum {
    fn sum<I: Iterator<Item = FixedSum>>(iter: I) -> Self {
        iter.fold(FixedSum::zero(), |a, b| a + b)
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_brute(n: u128) -> u128 {
        (1..=n).filter(|&a| gcd_u128(a, n) == 1).count() as u128
    }

    fn mobius_brute(n: u128) -> i8 {
        let mut m = n;
        let mut k = 0;
        let mut p = 2;
        while m > 1 {
            if m.is_multiple_of(p) {
                m /= p;
                if m.is_multiple_of(p) {
                    return 0;
                }
                k += 1;
            }
            p += 1;
        }
        if k % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn phi_and_mobius_match_brute_force() {
        for n in 1..=400u128 {
            assert_eq!(euler_phi(n).unwrap(), phi_brute(n), "phi({n})");
            let divs = divisors_with_mobius(n).unwrap();
            let brute: Vec<u128> = (1..=n).filter(|d| n % d == 0).collect();
            assert_eq!(divs.iter().map(|d| d.0).collect::<Vec<_>>(), brute);
            for (d, mu) in divs {
                assert_eq!(mu, mobius_brute(d), "mu({d})");
            }
        }
    }

    #[test]
    fn factor_limit_is_enforced() {
        assert!(factorize(FACTOR_LIMIT + 1).is_err());
        assert!(factorize(0).is_err());
        assert_eq!(factorize(999_999_000_001).unwrap().iter().map(|f| f.0.pow(f.1)).product::<u128>(), 999_999_000_001);
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..10_000u128 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX as u128 * u64::MAX as u128), u64::MAX as u128);
    }

    #[test]
    fn fixed_sum_is_order_independent() {
        let vals: Vec<f64> = (2..2000).map(|n| (n as f64).ln()).collect();
        let fwd: FixedSum = vals.iter().map(|&v| FixedSum::term(v)).sum();
        let rev: FixedSum = vals.iter().rev().map(|&v| FixedSum::term(v)).sum();
        assert_eq!(fwd, rev);
        let naive: f64 = vals.iter().sum();
        assert!((fwd.to_f64() - naive).abs() < 1e-9);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s = compensated_sum([1e16, 1.0, -1e16, 1.0]);
        assert_eq!(s, 2.0);
    }
}
