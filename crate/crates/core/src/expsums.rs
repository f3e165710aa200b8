//! Exponential sums and the cardinality of Piatetski-Shapiro multiples.
//!
//! `u ∼ U` always means `U/2 < u <= U`.

use std::f64::consts::TAU;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::Serialize;

use crate::arith::CompensatedSum;
use crate::dd::DD;
use crate::error::{bail, Error, Result};
use crate::moduli::{floor_pow, sim_window, Alpha, FLOOR_CERT_EPS};

/// Lattice size cap for [`weyl_bound_rhs`].
pub const WEYL_LATTICE_BUDGET: u128 = 100_000_000;
/// Largest `|h j^α / t|` whose fractional part is certified.
pub const PHASE_MAX: f64 = (1u64 << 50) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialSumValue {
    pub re: f64,
    pub im: f64,
    pub terms: u64,
}

impl ExponentialSumValue {
    fn new(z: Complex64, terms: u64) -> Self {
        ExponentialSumValue { re: z.re, im: z.im, terms }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.value().norm()
    }
}

/// `e(x)` for `x` already reduced to `[0, 1)`.
fn e_reduced(x: f64) -> Complex64 {
    let x = if x > 0.5 { x - 1.0 } else { x };
    Complex64::from_polar(1.0, TAU * x)
}

fn sum_phases(phases: impl Iterator<Item = f64>) -> (Complex64, u64) {
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    let mut n = 0;
    for x in phases {
        let z = e_reduced(x);
        re.add(z.re);
        im.add(z.im);
        n += 1;
    }
    (Complex64::new(re.value(), im.value()), n)
}

/// Real polynomial with coefficients in ascending order of degree; the
/// length fixes the nominal degree even if the top coefficient is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial(pub Vec<DD>);

impl RealPolynomial {
    pub fn from_f64(coeffs: &[f64]) -> Self {
        RealPolynomial(coeffs.iter().map(|&c| DD::from_f64(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> DD {
        self.0.last().copied().unwrap_or(DD::ZERO)
    }

    /// `{F(u)}`; Horner with a reduction after every step, exact up to
    /// double-double rounding because `u` is an integer.
    pub fn eval_frac(&self, u: i128) -> f64 {
        let x = DD::from_i128(u);
        let mut acc = DD::ZERO;
        for c in self.0.iter().rev() {
            acc = (acc * x + *c).fract();
        }
        acc.fract().to_f64()
    }
}

impl FromStr for RealPolynomial {
    type Err = Error;

    /// Comma-separated coefficients, each a decimal or `p/q`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("cannot parse polynomial {s:?}"));
        let coeffs = s
            .split(',')
            .map(|c| {
                let c = c.trim();
                match c.split_once('/') {
                    Some((p, q)) => {
                        let p: i128 = p.trim().parse().map_err(|_| bad())?;
                        let q: i128 = q.trim().parse().map_err(|_| bad())?;
                        if q == 0 {
                            return Err(bad());
                        }
                        Ok(DD::ratio(p, q))
                    }
                    None => c.parse::<f64>().map(DD::from_f64).map_err(|_| bad()),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() {
            return Err(bad());
        }
        Ok(RealPolynomial(coeffs))
    }
}

/// `Σ_{u=1}^{U} e(F(u))`.
pub fn weyl_sum(f: &RealPolynomial, u: u64) -> Result<ExponentialSumValue> {
    if u == 0 {
        bail!(Domain, "U must be >= 1");
    }
    let (z, n) = sum_phases((1..=u as i128).map(|x| f.eval_frac(x)));
    Ok(ExponentialSumValue::new(z, n))
}

fn factorial(k: usize) -> i128 {
    (1..=k as i128).product()
}

/// `U^{1-k/2^{k-1}} (Σ_{-U<ℓ_i<U} min{U, ⟨θ k! ℓ_1⋯ℓ_{k-1}⟩^{-1}})^{1/2^{k-1}}`
/// with `k` the nominal degree and `θ` the top coefficient.
pub fn weyl_bound_rhs(f: &RealPolynomial, u: u64) -> Result<f64> {
    let k = f.degree();
    if k < 2 {
        bail!(Domain, "Weyl bound needs degree >= 2, got {k}");
    }
    if u == 0 {
        bail!(Domain, "U must be >= 1");
    }
    let side = 2 * u as u128 - 1;
    let size = (0..k - 1).try_fold(1u128, |acc, _| acc.checked_mul(side)).unwrap_or(u128::MAX);
    if size > WEYL_LATTICE_BUDGET {
        bail!(Capacity, "Weyl lattice has {size} points, budget is {WEYL_LATTICE_BUDGET}");
    }
    let theta = f.leading() * DD::from_i128(factorial(k));
    let uf = u as f64;
    let mut acc = CompensatedSum::new();
    let mut idx = vec![-(u as i128 - 1); k - 1];
    loop {
        let p: i128 = idx.iter().product();
        let x = (theta * DD::from_i128(p)).fract().to_f64();
        let d = x.min(1.0 - x);
        acc.add(if d * uf <= 1.0 { uf } else { 1.0 / d });
        let mut i = 0;
        loop {
            if i == idx.len() {
                let power = 2f64.powi(k as i32 - 1);
                return Ok(uf.powf(1.0 - k as f64 / power) * acc.value().powf(1.0 / power));
            }
            if idx[i] < u as i128 - 1 {
                idx[i] += 1;
                break;
            }
            idx[i] = -(u as i128 - 1);
            i += 1;
        }
    }
}

/// Exact comparison `j^α <= R`.
fn pow_le(j: u128, alpha: &Alpha, r: u128) -> Result<bool> {
    let f = floor_pow(j, alpha)?;
    if f != r {
        return Ok(f < r);
    }
    // ⌊j^α⌋ = R: the comparison holds only when j^α is exactly R
    match alpha.ratio() {
        Some((p, q)) if p > 0 && q > 0 => Ok(BigUint::from(j).pow(p as u32) == BigUint::from(r).pow(q as u32)),
        _ => {
            let y = DD::from_u128(j).powdd(alpha.as_dd());
            let frac = (y - DD::from_u128(r)).to_f64();
            if frac > FLOOR_CERT_EPS {
                Ok(false)
            } else {
                bail!(Precision, "cannot decide whether {j}^{alpha} equals {r}")
            }
        }
    }
}

/// The `j` with `R^{1/α}/2 < j <= R^{1/α}`, i.e. `j^α <= R < (2j)^α`.
pub fn sim_indices(alpha: &Alpha, r: u128) -> Result<Vec<u128>> {
    if !(alpha.value() > 0.0) {
        bail!(Domain, "alpha must be positive");
    }
    if r == 0 {
        bail!(Domain, "R must be >= 1");
    }
    let root = (r as f64).powf(1.0 / alpha.value());
    let lo = ((root / 2.0).floor() as u128).saturating_sub(1).max(1);
    let hi = root.floor() as u128 + 2;
    let mut out = Vec::new();
    for j in lo..=hi {
        if pow_le(j, alpha, r)? && !pow_le(2 * j, alpha, r)? {
            out.push(j);
        }
    }
    Ok(out)
}

/// `{h j^α / t}`, exact for integer `α` and double-double otherwise.
fn sh_phase(j: u128, alpha: &Alpha, t: u64, h: i64) -> Result<f64> {
    if let Some(k) = alpha.is_integer() {
        let t = t as i128;
        let mut p = 1i128;
        let jm = (j % t as u128) as i128;
        for _ in 0..k {
            p = p * jm % t;
        }
        let num = (h as i128).rem_euclid(t) * p % t;
        return Ok(num as f64 / t as f64);
    }
    let x = DD::from_u128(j).powdd(alpha.as_dd()) * DD::from_i128(h as i128) / DD::from_i128(t as i128);
    if !(x.hi.abs() < PHASE_MAX) {
        bail!(Precision, "j = {j}: phase h j^alpha / t = {:e} is too large to reduce mod 1", x.hi);
    }
    Ok(x.fract().to_f64())
}

/// `S_h = Σ_{j ∼ R^{1/α}} e(h j^α / t)`.
pub fn sh_sum(alpha: &Alpha, t: u64, h: i64, r: u128) -> Result<ExponentialSumValue> {
    if t == 0 {
        bail!(Domain, "t must be >= 1");
    }
    let js = sim_indices(alpha, r)?;
    let phases = js.iter().map(|&j| sh_phase(j, alpha, t, h)).collect::<Result<Vec<_>>>()?;
    let (z, n) = sum_phases(phases.into_iter());
    Ok(ExponentialSumValue::new(z, n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibleCount {
    pub count: u64,
    pub quotients: Vec<u128>,
}

/// `{⌊j^α⌋/t : ⌊j^α⌋ ∼ R, t | ⌊j^α⌋}`.
pub fn ps_divisible_count(alpha: &Alpha, t: u64, r: u128) -> Result<DivisibleCount> {
    if t == 0 {
        bail!(Domain, "t must be >= 1");
    }
    let quotients: Vec<u128> =
        sim_window(alpha, r)?.into_iter().filter(|&(_, m)| m % t as u128 == 0).map(|(_, m)| m / t as u128).collect();
    Ok(DivisibleCount { count: quotients.len() as u64, quotients })
}

/// `t <= R^{1/6}`, decided in integers.
pub fn small_t(t: u64, r: u128) -> bool {
    (t as u128).checked_pow(6).is_some_and(|t6| t6 <= r)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpAuditRow {
    pub alpha: String,
    pub t: u64,
    #[serde(rename = "R")]
    pub r: u128,
    pub h: Option<i64>,
    pub measured: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `t > R^{1/6}`: outside the lemma's hypothesis, excluded from the frozen constant.
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrozenAudit {
    pub frozen_c: f64,
    pub worst_c: f64,
    pub passed: bool,
}

/// Growth tolerance over the constant frozen at the smallest `R`.
pub const GROWTH_TOL: f64 = 0.25;

/// Freezes the largest ratio at the smallest unflagged `R` and checks that no
/// unflagged row exceeds it by more than [`GROWTH_TOL`].
pub fn freeze(rows: &[ExpAuditRow]) -> FrozenAudit {
    let ok: Vec<&ExpAuditRow> = rows.iter().filter(|r| !r.flagged).collect();
    let Some(r0) = ok.iter().map(|r| r.r).min() else {
        return FrozenAudit { frozen_c: f64::NAN, worst_c: f64::NAN, passed: false };
    };
    let frozen_c = ok.iter().filter(|r| r.r == r0).map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let worst_c = ok.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    FrozenAudit { frozen_c, worst_c, passed: worst_c <= frozen_c * (1.0 + GROWTH_TOL) }
}

/// `#𝒮_{α,t}(R)` against `R^{1/α}/t + R^{1/2}` over the grid.
pub fn card_bound_audit(alpha: &Alpha, t_grid: &[u64], r_grid: &[u128]) -> Result<Vec<ExpAuditRow>> {
    let mut rows = Vec::new();
    for &r in r_grid {
        let window = sim_window(alpha, r)?;
        for &t in t_grid {
            if t == 0 {
                bail!(Domain, "t must be >= 1");
            }
            let count = window.iter().filter(|&&(_, m)| m % t as u128 == 0).count() as f64;
            let rf = r as f64;
            let rhs = rf.powf(1.0 / alpha.value()) / t as f64 + rf.sqrt();
            rows.push(ExpAuditRow {
                alpha: alpha.to_string(),
                t,
                r,
                h: None,
                measured: count,
                rhs,
                ratio: count / rhs,
                flagged: !small_t(t, r),
            });
        }
    }
    Ok(rows)
}

/// `|S_h|` against `h^{1/2} R^{1/2} / t^{1/2} + t^{1/2} R^{1/α-1/2} / h^{1/2}` for `1 <= h <= t`.
pub fn vdc_audit(alpha: &Alpha, t_grid: &[u64], r_grid: &[u128]) -> Result<Vec<ExpAuditRow>> {
    let mut rows = Vec::new();
    for &r in r_grid {
        for &t in t_grid {
            for h in 1..=t as i64 {
                let s = sh_sum(alpha, t, h, r)?;
                let (rf, tf, hf) = (r as f64, t as f64, h as f64);
                let rhs = (hf * rf / tf).sqrt() + (tf / hf).sqrt() * rf.powf(1.0 / alpha.value() - 0.5);
                rows.push(ExpAuditRow {
                    alpha: alpha.to_string(),
                    t,
                    r,
                    h: Some(h),
                    measured: s.abs(),
                    rhs,
                    ratio: s.abs() / rhs,
                    flagged: !small_t(t, r),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_audit_csv<W: Write>(rows: &[ExpAuditRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "t", "R", "h", "measured", "rhs", "ratio", "flagged"])?;
    for r in rows {
        w.write_record([
            r.alpha.clone(),
            r.t.to_string(),
            r.r.to_string(),
            r.h.map(|h| h.to_string()).unwrap_or_default(),
            r.measured.to_string(),
            r.rhs.to_string(),
            r.ratio.to_string(),
            r.flagged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtCount {
    pub exact: u64,
    pub expected: f64,
    pub et_rhs: f64,
}

/// Exact `#{u : γ_u ∈ [a, b]}` with the Erdős–Turán right-hand side
/// `U/H + Σ_{h<=H} (1/H + min(b-a, 1/h)) |Σ_u e(h γ_u)|`.
pub fn erdos_turan_count(points: &[f64], a: f64, b: f64, big_h: u64) -> Result<EtCount> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        bail!(Domain, "need 0 <= a <= b <= 1, got [{a}, {b}]");
    }
    if big_h == 0 {
        bail!(Domain, "H must be >= 1");
    }
    let exact = points.iter().filter(|&&g| a <= g && g <= b).count() as u64;
    let u = points.len() as f64;
    let hf = big_h as f64;
    let mut rhs = CompensatedSum::new();
    rhs.add(u / hf);
    for h in 1..=big_h {
        let (s, _) = sum_phases(points.iter().map(|&g| (h as f64 * g).rem_euclid(1.0)));
        rhs.add((1.0 / hf + (b - a).min(1.0 / h as f64)) * s.norm());
    }
    Ok(EtCount { exact, expected: u * (b - a), et_rhs: rhs.value() })
}

/// The three counts the cardinality argument moves between.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CardReadings {
    /// `#{⌊j^α⌋ ∼ R : t | ⌊j^α⌋}`.
    pub set_count: u64,
    /// `#{j : j^α ∼ R, {j^α/t} < 1/t}`.
    pub fractional_count: u64,
    /// `#{j : j^α ∼ R, {j^α/t} ∈ [0, 1/t]}`, the closed interval used with Erdős–Turán.
    pub closed_count: u64,
}

impl CardReadings {
    pub fn max_discrepancy(&self) -> u64 {
        let v = [self.set_count, self.fractional_count, self.closed_count];
        v.iter().max().unwrap() - v.iter().min().unwrap()
    }
}

/// For integer `α` the closed reading also picks up every `j^α ≡ 1 (mod t)`,
/// so the readings agree up to `O(1)` only for non-integer `α`.
pub fn card_readings(alpha: &Alpha, t: u64, r: u128) -> Result<CardReadings> {
    if t == 0 {
        bail!(Domain, "t must be >= 1");
    }
    let set_count = ps_divisible_count(alpha, t, r)?.count;
    // j^α ∼ R is R/2 < j^α <= R; j^α > R/2 is tested as (j^α)·2 > R.
    let root = (r as f64).powf(1.0 / alpha.value());
    let lo = (((r as f64) / 2.0).powf(1.0 / alpha.value()).floor() as u128).saturating_sub(1).max(1);
    let hi = root.floor() as u128 + 2;
    let (mut frac_count, mut closed_count) = (0, 0);
    for j in lo..=hi {
        if !pow_le(j, alpha, r)? {
            continue;
        }
        let y = DD::from_u128(j).powdd(alpha.as_dd());
        let half_gap = (y.mul_pow2(1) - DD::from_u128(r)).to_f64();
        let above_half = if half_gap.abs() > FLOOR_CERT_EPS {
            half_gap > 0.0
        } else {
            match alpha.ratio() {
                Some((p, q)) if p > 0 && q > 0 => {
                    // j^α > R/2  ⟺  2^q j^p > R^q
                    (BigUint::from(2u8).pow(q as u32) * BigUint::from(j).pow(p as u32)) > BigUint::from(r).pow(q as u32)
                }
                _ => bail!(Precision, "cannot decide whether {j}^{alpha} exceeds {r}/2"),
            }
        };
        if !above_half {
            continue;
        }
        let rem = floor_pow(j, alpha)? % t as u128;
        // {j^α/t} = (⌊j^α⌋ mod t + {j^α})/t, which equals 1/t only for an integer j^α
        if rem == 0 {
            frac_count += 1;
            closed_count += 1;
        } else if rem == 1 && is_exact_integer_power(j, alpha)? {
            closed_count += 1;
        }
    }
    Ok(CardReadings { set_count, fractional_count: frac_count, closed_count })
}

/// Whether `j^α` is an integer.
fn is_exact_integer_power(j: u128, alpha: &Alpha) -> Result<bool> {
    if alpha.is_integer().is_some() {
        return Ok(true);
    }
    match alpha.ratio() {
        Some((p, q)) if p > 0 && q > 0 => {
            let jp = BigUint::from(j).pow(p as u32);
            let root = jp.nth_root(q as u32);
            Ok(root.pow(q as u32) == jp)
        }
        _ => Ok(false),
    }
}
