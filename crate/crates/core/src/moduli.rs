//! Sequences of moduli: perfect powers, polynomial values, Piatetski-Shapiro
//! floors `⌊j^α⌋` and explicit lists, plus dyadic windows of the latter.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dd::DD;
use crate::error::{bail, Error, Result};

/// A real exponent that remembers an exact rational value when it has one.
///
/// Decimal strings such as `"1.2"` and fractions such as `"6/5"` parse to the
/// exact rational; floats are matched against rationals with denominator at
/// most 10^4 and fall back to their binary value otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    value: f64,
    ratio: Option<(i64, i64)>,
}

impl Alpha {
    pub fn from_ratio(p: i64, q: i64) -> Result<Alpha> {
        if q == 0 {
            bail!(Domain, "alpha denominator is zero");
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Ok(Alpha { value: p as f64 / q as f64, ratio: Some((p, q)) })
    }

    pub fn from_f64(v: f64) -> Alpha {
        if !v.is_finite() {
            return Alpha { value: v, ratio: None };
        }
        // Continued-fraction convergents; accept the first that reproduces v.
        let (mut h0, mut h1) = (0i64, 1i64);
        let (mut k0, mut k1) = (1i64, 0i64);
        let mut x = v;
        for _ in 0..40 {
            let a = x.floor();
            if a.abs() > 1e12 {
                break;
            }
            let a = a as i64;
            let h2 = a * h1 + h0;
            let k2 = a * k1 + k0;
            if k2 > 10_000 {
                break;
            }
            if h2 as f64 / k2 as f64 == v {
                return Alpha::from_ratio(h2, k2).unwrap_or(Alpha { value: v, ratio: None });
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            let f = x - a as f64;
            if f == 0.0 {
                break;
            }
            x = 1.0 / f;
        }
        Alpha { value: v, ratio: None }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn ratio(&self) -> Option<(i64, i64)> {
        self.ratio
    }

    pub fn is_integer(&self) -> Option<u32> {
        match self.ratio {
            Some((p, 1)) if p >= 0 && p <= u32::MAX as i64 => Some(p as u32),
            _ => None,
        }
    }

    pub fn as_dd(&self) -> DD {
        match self.ratio {
            Some((p, q)) => DD::ratio(p as i128, q as i128),
            None => DD::from_f64(self.value),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio {
            Some((p, 1)) => write!(f, "{p}"),
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Alpha> {
        let s = s.trim();
        let bad = || Error::Domain(format!("cannot parse alpha from {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            return Alpha::from_ratio(p, q);
        }
        let plain = s.strip_prefix('-').unwrap_or(s);
        if !plain.is_empty() && plain.chars().all(|c| c.is_ascii_digit() || c == '.') && plain.matches('.').count() <= 1 {
            let (int, frac) = plain.split_once('.').unwrap_or((plain, ""));
            if int.len() + frac.len() <= 17 {
                let digits: i64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
                let sign = if s.starts_with('-') { -1 } else { 1 };
                return Alpha::from_ratio(sign * digits, 10i64.pow(frac.len() as u32));
            }
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        Ok(Alpha::from_f64(v))
    }
}

/// Distance within which `j^α` is treated as possibly integral and re-checked exactly.
pub const FLOOR_CERT_EPS: f64 = 1e-10;
/// Largest `j^α` whose floor the double-double evaluation can certify.
pub const FLOOR_MAX: f64 = 1e18;

/// `⌊j^α⌋`, certified.
///
/// The power is evaluated in double-double; if it lies within
/// [`FLOOR_CERT_EPS`] of an integer the floor is settled by the exact
/// comparison `m^q <= j^p` for rational `α = p/q`, and is a precision error
/// for irrational `α`.
pub fn floor_pow(j: u128, alpha: &Alpha) -> Result<u128> {
    if j == 0 {
        return Ok(0);
    }
    if let Some(k) = alpha.is_integer() {
        return j.checked_pow(k).ok_or_else(|| Error::Range(format!("{j}^{k} overflows 128 bits")));
    }
    let y = DD::from_u128(j).powdd(alpha.as_dd());
    if !(y.hi < FLOOR_MAX) {
        bail!(Precision, "j = {j}: {j}^{alpha} exceeds the certifiable range {FLOOR_MAX:e}");
    }
    let m = y.floor();
    let frac = (y - m).to_f64();
    let m = m.to_f64() as u128;
    if frac > FLOOR_CERT_EPS && frac < 1.0 - FLOOR_CERT_EPS {
        return Ok(m);
    }
    match alpha.ratio() {
        Some((p, q)) if p > 0 && q > 0 => {
            let jp = BigUint::from(j).pow(p as u32);
            let root = jp.nth_root(q as u32);
            u128::try_from(root).map_err(|_| Error::Range(format!("floor of {j}^{alpha} overflows")))
        }
        _ => bail!(
            Precision,
            "j = {j}: {j}^{alpha} lies within {FLOOR_CERT_EPS:e} of an integer and alpha is not rational"
        ),
    }
}

/// Index `j` with `⌊j^α⌋ = m`, if any.
pub fn ps_index(m: u128, alpha: &Alpha) -> Result<Option<u128>> {
    if m == 0 {
        return Ok(None);
    }
    let guess = (m as f64).powf(1.0 / alpha.value()).ceil().max(1.0) as u128;
    for j in guess.saturating_sub(2).max(1)..=guess + 2 {
        let f = floor_pow(j, alpha)?;
        if f == m {
            return Ok(Some(j));
        }
        if f > m {
            break;
        }
    }
    Ok(None)
}

pub fn is_ps_member(m: u128, alpha: &Alpha) -> Result<bool> {
    Ok(ps_index(m, alpha)?.is_some())
}

/// Integer polynomial with coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPolynomial(pub Vec<i128>);

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        IntPolynomial(coeffs)
    }

    pub fn monomial(k: u32) -> Self {
        let mut c = vec![0; k as usize + 1];
        c[k as usize] = 1;
        IntPolynomial(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> i128 {
        *self.0.last().unwrap_or(&0)
    }

    pub fn eval(&self, x: i128) -> Result<i128> {
        let mut acc: i128 = 0;
        for &c in self.0.iter().rev() {
            acc = acc
                .checked_mul(x)
                .and_then(|v| v.checked_add(c))
                .ok_or_else(|| Error::Range(format!("polynomial value at {x} overflows 128 bits")))?;
        }
        Ok(acc)
    }

    /// Value modulo `m`, in `[0, m)`, without overflow for any `x`.
    pub fn eval_mod(&self, x: i128, m: u128) -> u128 {
        let m_i = m as i128;
        let xr = x.rem_euclid(m_i) as u128;
        let mut acc: u128 = 0;
        for &c in self.0.iter().rev() {
            acc = mulmod(acc, xr, m);
            acc = (acc + c.rem_euclid(m_i) as u128) % m;
        }
        acc
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|c| c.trim().parse::<i128>().map_err(|_| Error::Domain(format!("bad polynomial coefficient {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntPolynomial::new(coeffs))
    }
}

/// `a * b mod m` for `a, b < m`.
pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if let Some(p) = a.checked_mul(b) {
        return p % m;
    }
    let (mut a, mut b, mut r) = (a % m, b, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            r = addmod(r, a, m);
        }
        a = addmod(a, a, m);
        b >>= 1;
    }
    r
}

fn addmod(a: u128, b: u128, m: u128) -> u128 {
    if a >= m - b {
        a - (m - b)
    } else {
        a + b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    Power { k: u32 },
    Polynomial { coefficients: Vec<i128> },
    PiatetskiShapiro { alpha: Alpha },
    Explicit,
}

/// A strictly increasing sequence of positive moduli `m_1 < m_2 < ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuliSequence {
    kind: SequenceKind,
    values: Vec<u128>,
    alpha_hint: f64,
}

fn check_increasing(values: &[u128]) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        if w[1] <= w[0] {
            bail!(Validation, "sequence not strictly increasing at j = {} ({} then {})", i + 2, w[0], w[1]);
        }
    }
    if values.first() == Some(&0) {
        bail!(Validation, "modulus at j = 1 is zero");
    }
    Ok(())
}

pub fn generate_power(k: u32, q: u64) -> Result<ModuliSequence> {
    if k == 0 {
        bail!(Domain, "k must be >= 1");
    }
    if q == 0 {
        bail!(Domain, "Q must be >= 1");
    }
    let values = (1..=q as u128)
        .map(|j| j.checked_pow(k).ok_or_else(|| Error::Range(format!("j = {j}: {j}^{k} overflows 128 bits"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModuliSequence { kind: SequenceKind::Power { k }, values, alpha_hint: k as f64 })
}

pub fn generate_polynomial(f: &IntPolynomial, q: u64) -> Result<ModuliSequence> {
    if f.degree() < 1 {
        bail!(Domain, "polynomial degree must be >= 1");
    }
    if f.leading() <= 0 {
        bail!(Domain, "leading coefficient must be positive");
    }
    if q == 0 {
        bail!(Domain, "Q must be >= 1");
    }
    let mut values = Vec::with_capacity(q as usize);
    for j in 1..=q as i128 {
        let v = f.eval(j)?;
        if v < 1 {
            bail!(Validation, "f({j}) = {v} < 1");
        }
        let v = v as u128;
        if let Some(&prev) = values.last() {
            if v <= prev {
                bail!(Validation, "f not strictly increasing at j = {j}: f({}) = {prev}, f({j}) = {v}", j - 1);
            }
        }
        values.push(v);
    }
    Ok(ModuliSequence {
        kind: SequenceKind::Polynomial { coefficients: f.0.clone() },
        values,
        alpha_hint: f.degree() as f64,
    })
}

pub fn generate_piatetski_shapiro(alpha: Alpha, jmax: u64) -> Result<ModuliSequence> {
    if !(alpha.value() > 1.0) {
        bail!(Domain, "alpha = {alpha} must exceed 1");
    }
    let values = (1..=jmax as u128).map(|j| floor_pow(j, &alpha)).collect::<Result<Vec<_>>>()?;
    Ok(ModuliSequence { kind: SequenceKind::PiatetskiShapiro { alpha }, values, alpha_hint: alpha.value() })
}

impl ModuliSequence {
    pub fn explicit(values: Vec<u128>, alpha_hint: Option<f64>) -> Result<ModuliSequence> {
        check_increasing(&values)?;
        let alpha_hint = alpha_hint.unwrap_or_else(|| {
            if values.len() >= 8 {
                growth_slope(&values)
            } else if values.len() >= 2 {
                (*values.last().unwrap() as f64).ln().max(0.0) / (values.len() as f64).ln()
            } else {
                1.0
            }
        });
        Ok(ModuliSequence { kind: SequenceKind::Explicit, values, alpha_hint })
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn values(&self) -> &[u128] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn alpha_hint(&self) -> f64 {
        self.alpha_hint
    }

    /// `m_j` for 1-based `j`.
    pub fn get(&self, j: usize) -> u128 {
        self.values[j - 1]
    }

    /// The first `q` moduli, `m_1, ..., m_q`.
    pub fn prefix(&self, q: usize) -> Result<&[u128]> {
        if q > self.values.len() {
            bail!(Domain, "Q = {q} exceeds sequence length {}", self.values.len());
        }
        Ok(&self.values[..q])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, params) = match &self.kind {
            SequenceKind::Power { k } => ("power", json!({ "k": k })),
            SequenceKind::Polynomial { coefficients } => ("polynomial", json!({ "coefficients": coefficients })),
            SequenceKind::PiatetskiShapiro { alpha } => ("piatetski_shapiro", json!({ "alpha": alpha.to_string() })),
            SequenceKind::Explicit => ("explicit", json!({ "alpha_hint": self.alpha_hint })),
        };
        json!({ "kind": kind, "params": params, "values": self.values })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<ModuliSequence> {
        let bad = |what: &str| Error::Validation(format!("sequence JSON: {what}"));
        let kind = v.get("kind").and_then(|k| k.as_str()).ok_or_else(|| bad("missing kind"))?;
        let values: Vec<u128> = serde_json::from_value(v.get("values").cloned().ok_or_else(|| bad("missing values"))?)?;
        let params = v.get("params").cloned().unwrap_or(json!({}));
        let n = values.len() as u64;
        let seq = match kind {
            "power" => generate_power(params["k"].as_u64().ok_or_else(|| bad("params.k"))? as u32, n)?,
            "polynomial" => {
                let c: Vec<i128> = serde_json::from_value(params["coefficients"].clone())?;
                generate_polynomial(&IntPolynomial::new(c), n)?
            }
            "piatetski_shapiro" => {
                let a: Alpha = params["alpha"].as_str().ok_or_else(|| bad("params.alpha"))?.parse()?;
                generate_piatetski_shapiro(a, n)?
            }
            "explicit" => return ModuliSequence::explicit(values, params["alpha_hint"].as_f64()),
            other => return Err(bad(&format!("unknown kind {other:?}"))),
        };
        if seq.values != values {
            return Err(bad("values do not match the declared generator"));
        }
        Ok(seq)
    }

    /// One-column CSV with header `m_j`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m_j"])?;
        for v in &self.values {
            w.write_record([v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `{⌊j^α⌋ : j ∈ ℕ} ∩ [R, 2R]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicWindow {
    pub alpha: Alpha,
    pub r: u128,
    /// `(j, ⌊j^α⌋)` in ascending order.
    pub members: Vec<(u128, u128)>,
}

impl DyadicWindow {
    pub fn moduli(&self) -> Vec<u128> {
        self.members.iter().map(|m| m.1).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Members `(j, ⌊j^α⌋)` with `lo <= ⌊j^α⌋ <= hi` (inclusive on both sides).
pub fn ps_members_between(alpha: &Alpha, lo: u128, hi: u128) -> Result<Vec<(u128, u128)>> {
    if !(alpha.value() > 1.0) {
        bail!(Domain, "alpha = {alpha} must exceed 1");
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let inv = 1.0 / alpha.value();
    let j_lo = ((lo as f64).powf(inv).floor() as u128).saturating_sub(1).max(1);
    let j_hi = (hi as f64).powf(inv).floor() as u128 + 2;
    let mut out = Vec::new();
    for j in j_lo..=j_hi {
        let m = floor_pow(j, alpha)?;
        if m > hi {
            break;
        }
        if m >= lo {
            out.push((j, m));
        }
    }
    Ok(out)
}

pub fn window(alpha: Alpha, r: u128) -> Result<DyadicWindow> {
    if r == 0 {
        bail!(Domain, "R must be >= 1");
    }
    let hi = r.checked_mul(2).ok_or_else(|| Error::Range(format!("2R overflows for R = {r}")))?;
    let members = ps_members_between(&alpha, r, hi)?;
    Ok(DyadicWindow { alpha, r, members })
}

/// Members with `R/2 < ⌊j^α⌋ <= R`.
pub fn sim_window(alpha: &Alpha, r: u128) -> Result<Vec<(u128, u128)>> {
    ps_members_between(alpha, r / 2 + 1, r)
}

pub fn is_convex(values: &[u128]) -> Result<bool> {
    if values.len() < 3 {
        bail!(Domain, "convexity needs at least 3 terms, got {}", values.len());
    }
    Ok(values.windows(3).all(|w| w[1] - w[0] < w[2] - w[1]))
}

fn growth_slope(values: &[u128]) -> f64 {
    let n = values.len();
    let start = n / 2;
    let xs: Vec<f64> = (start..n).map(|i| ((i + 1) as f64).ln()).collect();
    let ys: Vec<f64> = values[start..].iter().map(|&v| (v as f64).ln()).collect();
    crate::arith::ls_slope(&xs, &ys)
}

/// Least-squares slope of `log m_j` against `log j` over the upper half.
pub fn growth_exponent(seq: &ModuliSequence) -> Result<f64> {
    if seq.len() < 8 {
        bail!(Domain, "growth exponent needs at least 8 terms, got {}", seq.len());
    }
    Ok(growth_slope(seq.values()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Alpha {
        s.parse().unwrap()
    }

    #[test]
    fn alpha_parsing_recovers_rationals() {
        assert_eq!(a("1.2").ratio(), Some((6, 5)));
        assert_eq!(a("3/2").ratio(), Some((3, 2)));
        assert_eq!(Alpha::from_f64(1.5).ratio(), Some((3, 2)));
        assert_eq!(Alpha::from_f64(1.2).ratio(), Some((6, 5)));
        assert_eq!(Alpha::from_f64(std::f64::consts::PI).ratio(), None);
        assert_eq!(a("2").is_integer(), Some(2));
        assert!("x".parse::<Alpha>().is_err());
    }

    #[test]
    fn power_examples() {
        assert_eq!(generate_power(2, 4).unwrap().values(), &[1, 4, 9, 16]);
        assert_eq!(generate_power(1, 3).unwrap().values(), &[1, 2, 3]);
        assert_eq!(generate_power(5, 3).unwrap().values(), &[1, 32, 243]);
        let err = generate_power(128, 3).unwrap_err();
        assert!(matches!(err, Error::Range(ref m) if m.contains("j = 2")), "{err}");
    }

    #[test]
    fn polynomial_examples() {
        let sq = IntPolynomial::monomial(2);
        assert_eq!(generate_polynomial(&sq, 4).unwrap().values(), &[1, 4, 9, 16]);
        let f: IntPolynomial = "1,1,1".parse().unwrap();
        assert_eq!(generate_polynomial(&f, 3).unwrap().values(), &[3, 7, 13]);
        let g = IntPolynomial::new(vec![0, -10, 1]);
        assert!(matches!(generate_polynomial(&g, 3), Err(Error::Validation(m)) if m.contains("f(1) = -9")));
        let neg = IntPolynomial::new(vec![5, -1]);
        assert!(matches!(generate_polynomial(&neg, 3), Err(Error::Domain(_))));
        // f(1) = 6, f(2) = 4: positive but decreasing
        let dip = IntPolynomial::new(vec![12, -7, 1]);
        assert!(matches!(generate_polynomial(&dip, 3), Err(Error::Validation(m)) if m.contains("j = 2")));
    }

    #[test]
    fn piatetski_shapiro_examples() {
        assert_eq!(generate_piatetski_shapiro(a("1.5"), 5).unwrap().values(), &[1, 2, 5, 8, 11]);
        assert_eq!(generate_piatetski_shapiro(a("2.0"), 4).unwrap().values(), &[1, 4, 9, 16]);
        assert_eq!(generate_piatetski_shapiro(a("1.2"), 4).unwrap().values(), &[1, 2, 3, 5]);
        assert!(matches!(generate_piatetski_shapiro(a("1"), 4), Err(Error::Domain(_))));
    }

    #[test]
    fn floors_match_exact_integer_roots() {
        // j^(3/2) hits integers at perfect squares, j^(6/5) at fifth powers
        let three_halves = a("3/2");
        for j in 1..3000u128 {
            assert_eq!(floor_pow(j, &three_halves).unwrap(), crate::arith::isqrt(j * j * j), "j = {j}");
        }
        let six_fifths = a("6/5");
        for j in [1u128, 32, 243, 1024, 3125, 7776, 100_000] {
            let exact = BigUint::from(j).pow(6).nth_root(5);
            assert_eq!(BigUint::from(floor_pow(j, &six_fifths).unwrap()), exact, "j = {j}");
        }
    }

    #[test]
    fn irrational_alpha_near_integer_is_a_precision_error() {
        // (2^(1/φ))^φ ... simpler: alpha = log2(3) as a float, 2^alpha is ~3.
        let alpha = Alpha::from_f64(3f64.log2());
        assert!(alpha.ratio().is_none());
        assert!(matches!(floor_pow(2, &alpha), Err(Error::Precision(m)) if m.contains("j = 2")));
    }

    #[test]
    fn window_examples() {
        assert_eq!(window(a("2"), 10).unwrap().moduli(), vec![16]);
        let w = window(a("1.5"), 8).unwrap();
        assert_eq!(w.moduli(), vec![8, 11, 14]);
        assert_eq!(w.members.iter().map(|m| m.0).collect::<Vec<_>>(), vec![4, 5, 6]);
        assert_eq!(window(a("2"), 1).unwrap().moduli(), vec![1]);
    }

    #[test]
    fn convexity_examples() {
        assert!(is_convex(&[1, 4, 9, 16]).unwrap());
        assert!(!is_convex(&[1, 2, 3, 4]).unwrap());
        assert!(!is_convex(&[1, 2, 5, 8]).unwrap());
        assert!(is_convex(&[1, 2]).is_err());
    }

    #[test]
    fn growth_exponent_examples() {
        assert!((growth_exponent(&generate_power(3, 64).unwrap()).unwrap() - 3.0).abs() < 0.01);
        let ps = generate_piatetski_shapiro(a("1.5"), 256).unwrap();
        assert!((growth_exponent(&ps).unwrap() - 1.5).abs() < 0.02);
        let lin = ModuliSequence::explicit((1..=20).collect(), None).unwrap();
        assert!((growth_exponent(&lin).unwrap() - 1.0).abs() < 0.05);
        assert!(growth_exponent(&generate_power(2, 7).unwrap()).is_err());
    }

    #[test]
    fn explicit_rejects_duplicates_and_zero() {
        assert!(ModuliSequence::explicit(vec![2, 2, 3], None).is_err());
        assert!(ModuliSequence::explicit(vec![0, 2], None).is_err());
    }

    #[test]
    fn json_and_csv_serialization() {
        let seq = generate_piatetski_shapiro(a("3/2"), 6).unwrap();
        let j = seq.to_json();
        assert_eq!(j["kind"], "piatetski_shapiro");
        assert_eq!(ModuliSequence::from_json(&j).unwrap(), seq);
        let mut tampered = j.clone();
        tampered["values"][2] = json!(6);
        assert!(ModuliSequence::from_json(&tampered).is_err());
        let mut buf = Vec::new();
        generate_power(2, 3).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "m_j\n1\n4\n9\n");
    }

    #[test]
    fn ps_membership() {
        let al = a("1.5");
        assert_eq!(ps_index(11, &al).unwrap(), Some(5));
        assert_eq!(ps_index(12, &al).unwrap(), None);
        assert!(is_ps_member(1, &al).unwrap());
    }

    #[test]
    fn eval_mod_matches_eval() {
        let f = IntPolynomial::new(vec![-7, 3, 0, 2]);
        for x in -20..20 {
            for m in 1..30u128 {
                assert_eq!(f.eval_mod(x, m) as i128, f.eval(x).unwrap().rem_euclid(m as i128));
            }
        }
        assert_eq!(mulmod(u128::MAX - 1, u128::MAX - 2, u128::MAX), 2);
    }
}
