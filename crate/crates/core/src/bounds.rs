//! Exponent calculus for large sieve bounds with moduli `q^k`.
//!
//! Every bound is written as `Δ = Q^{e(ν) + o(1)}` at `N = Q^ν`, with the
//! `o(1)` dropped. Exponents are max/min trees over affine functions of `ν`,
//! evaluated in exact rationals when all inputs are rational.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{bail, Error, Result};

pub type Rational = Ratio<i128>;

fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Lower end of the range `x^{9/20-ε} <= R <= x^{1/2-ε}` for the level of distribution.
pub const LEVEL_LOW: (i128, i128) = (9, 20);
pub const LEVEL_HIGH: (i128, i128) = (1, 2);
/// Shkredov's energy exponent for convex sequences.
pub const SHKREDOV_EXPONENT: (i128, i128) = (32, 13);
/// Rivat–Wu threshold for prime Piatetski-Shapiro moduli.
pub const RIVAT_WU_ALPHA0: (i128, i128) = (243, 205);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coef {
    Exact(Rational),
    Approx(f64),
}

impl Coef {
    fn to_f64(self) -> f64 {
        match self {
            Coef::Exact(r) => rational_to_f64(&r),
            Coef::Approx(x) => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(self) -> f64 {
        match self {
            Value::Exact(r) => rational_to_f64(&r),
            Value::Approx(x) => x,
        }
    }

    fn combine(self, other: Value, take_max: bool) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(if take_max { a.max(b) } else { a.min(b) }),
            (a, b) => {
                let (x, y) = (a.to_f64(), b.to_f64());
                Value::Approx(if take_max { x.max(y) } else { x.min(y) })
            }
        }
    }
}

/// `c0 + c1 ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub c0: Coef,
    pub c1: Coef,
}

impl Affine {
    fn exact(c0: Rational, c1: Rational) -> Self {
        Affine { c0: Coef::Exact(c0), c1: Coef::Exact(c1) }
    }

    fn eval(&self, nu: &Value) -> Value {
        match (self.c0, self.c1, nu) {
            (Coef::Exact(a), Coef::Exact(b), Value::Exact(v)) => Value::Exact(a + b * v),
            _ => Value::Approx(self.c0.to_f64() + self.c1.to_f64() * nu.to_f64()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lin(Affine),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
}

impl Expr {
    fn lin(c0: Rational, c1: Rational) -> Expr {
        Expr::Lin(Affine::exact(c0, c1))
    }

    pub fn eval(&self, nu: &Value) -> Value {
        match self {
            Expr::Lin(a) => a.eval(nu),
            Expr::Max(xs) => fold(xs, nu, true),
            Expr::Min(xs) => fold(xs, nu, false),
        }
    }

    /// The affine pieces, in tree order.
    pub fn pieces(&self) -> Vec<Affine> {
        match self {
            Expr::Lin(a) => vec![*a],
            Expr::Max(xs) | Expr::Min(xs) => xs.iter().flat_map(Expr::pieces).collect(),
        }
    }
}

fn fold(xs: &[Expr], nu: &Value, take_max: bool) -> Value {
    let mut it = xs.iter().map(|x| x.eval(nu));
    let first = it.next().expect("empty max/min");
    it.fold(first, |acc, v| acc.combine(v, take_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Classical,
    Trivial,
    Conjecture,
    Zhao,
    BaierZhao,
    BaierZhaoK3,
    Halupczok,
    Munsch,
    ThmK5,
    ThmEnergy,
    ThmF,
}

impl BoundId {
    /// Catalog order; also the tie-break order of [`winner_map`].
    pub const ALL: [BoundId; 11] = [
        BoundId::Classical,
        BoundId::Trivial,
        BoundId::Conjecture,
        BoundId::Zhao,
        BoundId::BaierZhao,
        BoundId::BaierZhaoK3,
        BoundId::Halupczok,
        BoundId::Munsch,
        BoundId::ThmK5,
        BoundId::ThmEnergy,
        BoundId::ThmF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::Classical => "classical",
            BoundId::Trivial => "trivial",
            BoundId::Conjecture => "conjecture",
            BoundId::Zhao => "zhao",
            BoundId::BaierZhao => "baier_zhao",
            BoundId::BaierZhaoK3 => "baier_zhao_k3",
            BoundId::Halupczok => "halupczok",
            BoundId::Munsch => "munsch",
            BoundId::ThmK5 => "thm_k5",
            BoundId::ThmEnergy => "thm_energy",
            BoundId::ThmF => "thm_f",
        }
    }

    pub fn is_proven(self) -> bool {
        self != BoundId::Conjecture
    }

    pub fn valid_for(self, k: u32) -> bool {
        match self {
            BoundId::Classical => k == 1,
            BoundId::Trivial | BoundId::Conjecture | BoundId::ThmEnergy => k >= 1,
            BoundId::BaierZhaoK3 => k == 3,
            BoundId::ThmK5 => k >= 5,
            BoundId::Zhao | BoundId::BaierZhao | BoundId::Halupczok | BoundId::Munsch | BoundId::ThmF => k >= 2,
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown bound id {s:?}")))
    }
}

/// Largest `k` the exact-rational evaluators are sized for.
pub const K_MAX: u32 = 60;

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        bail!(Domain, "k must be >= 2, got {k}");
    }
    if k > K_MAX {
        bail!(Range, "k = {k} exceeds {K_MAX}");
    }
    Ok(())
}

/// `κ_k = 2^{k-1}`.
pub fn kappa(k: u32) -> Result<u128> {
    check_k(k)?;
    Ok(1u128 << (k - 1))
}

/// `ω_k = 1/((k-1)(k-2)+2)`.
pub fn omega(k: u32) -> Result<Rational> {
    check_k(k)?;
    let k = k as i128;
    Ok(rat(1, (k - 1) * (k - 2) + 2))
}

/// Exponent pair `(e1, e2)` with `E⁺(𝐦_Q) <= Q^{e1}` and `E⁺_⋆(𝐦_Q) <= Q^{e2}`
/// used by the general energy theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyExponents {
    pub e_plus: Coef,
    pub e_star: Coef,
}

impl Default for EnergyExponents {
    fn default() -> Self {
        EnergyExponents { e_plus: Coef::Exact(int(2)), e_star: Coef::Exact(int(2)) }
    }
}

/// `max(ν + e1/4, 3ν/4 + α/2 + e2/4)`.
pub fn thm_energy_expr(alpha: Coef, energies: EnergyExponents) -> Expr {
    let term2 = match (alpha, energies.e_star) {
        (Coef::Exact(a), Coef::Exact(e)) => Coef::Exact(a / 2 + e / 4),
        (a, e) => Coef::Approx(a.to_f64() / 2.0 + e.to_f64() / 4.0),
    };
    let term1 = match energies.e_plus {
        Coef::Exact(e) => Coef::Exact(e / 4),
        Coef::Approx(e) => Coef::Approx(e / 4.0),
    };
    Expr::Max(vec![
        Expr::Lin(Affine { c0: term1, c1: Coef::Exact(int(1)) }),
        Expr::Lin(Affine { c0: term2, c1: Coef::Exact(rat(3, 4)) }),
    ])
}

fn zhao_expr(k: i128, kappa: i128) -> Expr {
    let ik = rat(1, kappa);
    Expr::Max(vec![
        Expr::lin(int(k + 1), int(0)),
        Expr::lin(int(1) - ik, int(1)),
        Expr::lin(int(1) + int(k) * ik, int(1) - ik),
    ])
}

/// The exponent expression of bound `id` at `k`.
pub fn bound_expr(id: BoundId, k: u32) -> Result<Expr> {
    if k == 0 || k > K_MAX {
        bail!(Domain, "k = {k} outside 1..={K_MAX}");
    }
    if !id.valid_for(k) {
        bail!(Domain, "bound {id} is not valid for k = {k}");
    }
    let ki = k as i128;
    let zero = int(0);
    let one = int(1);
    Ok(match id {
        BoundId::Classical => Expr::Max(vec![Expr::lin(int(2), zero), Expr::lin(zero, one)]),
        BoundId::Trivial => Expr::Min(vec![
            Expr::Max(vec![Expr::lin(int(2 * ki), zero), Expr::lin(zero, one)]),
            Expr::Max(vec![Expr::lin(int(1 + ki), zero), Expr::lin(one, one)]),
        ]),
        BoundId::Conjecture => Expr::Max(vec![Expr::lin(int(ki + 1), zero), Expr::lin(zero, one)]),
        BoundId::Zhao | BoundId::ThmF => zhao_expr(ki, kappa(k)? as i128),
        BoundId::BaierZhao => Expr::Max(vec![
            Expr::lin(int(ki + 1), zero),
            Expr::lin(zero, one),
            Expr::lin(int(ki), rat(1, 2)),
        ]),
        BoundId::BaierZhaoK3 => Expr::Max(vec![
            Expr::lin(int(4), zero),
            Expr::lin(rat(6, 5), rat(9, 10)),
            Expr::lin(rat(6, 7), one),
        ]),
        BoundId::Halupczok => {
            let w = omega(k)?;
            let e = rat(1, ki * (ki - 1));
            let a = Expr::Max(vec![Expr::lin(one - e, one), Expr::lin(rat(ki, ki - 1), one - e)]);
            let b = Expr::lin(one + int(2 * ki - 1) * w, one - w);
            Expr::Max(vec![Expr::lin(int(ki + 1), zero), Expr::Min(vec![a, b])])
        }
        BoundId::Munsch => Expr::lin(rat(ki + 2, ki + 1), one - rat(1, ki * (ki + 1))),
        BoundId::ThmK5 => {
            let c = Coef::Approx(ki as f64 / 2.0 + 0.25 + 1.0 / (2.0 * (ki as f64).sqrt()));
            Expr::Max(vec![
                Expr::lin(rat(1, 2), one),
                Expr::Lin(Affine { c0: c, c1: Coef::Exact(rat(3, 4)) }),
            ])
        }
        BoundId::ThmEnergy => thm_energy_expr(Coef::Exact(int(ki)), EnergyExponents::default()),
    })
}

/// Exponent of `Q` in bound `id` at `N = Q^ν`.
pub fn delta_exponent(id: BoundId, k: u32, nu: f64) -> Result<f64> {
    if !nu.is_finite() {
        bail!(Domain, "nu must be finite");
    }
    Ok(bound_expr(id, k)?.eval(&Value::Approx(nu)).to_f64())
}

/// As [`delta_exponent`], exact when the bound has rational coefficients.
pub fn delta_exponent_exact(id: BoundId, k: u32, nu: Rational) -> Result<Value> {
    Ok(bound_expr(id, k)?.eval(&Value::Exact(nu)))
}

/// Closed interval of `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const SCAN_STEPS: usize = 4000;
const BISECT_TOL: f64 = 1e-13;

/// The intervals of `[lo, hi]` where bound `a` has a strictly smaller exponent than `b`.
pub fn crossover_on(a: BoundId, b: BoundId, k: u32, lo: f64, hi: f64) -> Result<Vec<Interval>> {
    let (ea, eb) = (bound_expr(a, k)?, bound_expr(b, k)?);
    let d = |nu: f64| ea.eval(&Value::Approx(nu)).to_f64() - eb.eval(&Value::Approx(nu)).to_f64();
    Ok(negative_intervals(d, lo, hi))
}

/// [`crossover_on`] over the critical range `[k, 2k]`.
pub fn crossover(a: BoundId, b: BoundId, k: u32) -> Result<Vec<Interval>> {
    crossover_on(a, b, k, k as f64, 2.0 * k as f64)
}

fn bisect(f: &impl Fn(f64) -> f64, mut neg: f64, mut pos: f64) -> f64 {
    while (pos - neg).abs() > BISECT_TOL {
        let mid = 0.5 * (neg + pos);
        if f(mid) < 0.0 {
            neg = mid;
        } else {
            pos = mid;
        }
    }
    0.5 * (neg + pos)
}

fn negative_intervals(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<Interval> {
    let mut out = Vec::new();
    if !(hi > lo) {
        return out;
    }
    let step = (hi - lo) / SCAN_STEPS as f64;
    let mut start: Option<f64> = (f(lo) < 0.0).then_some(lo);
    let mut prev = lo;
    for i in 1..=SCAN_STEPS {
        let x = if i == SCAN_STEPS { hi } else { lo + step * i as f64 };
        let neg = f(x) < 0.0;
        match (start, neg) {
            (None, true) => start = Some(bisect(&f, x, prev)),
            (Some(s), false) => {
                let end = bisect(&f, prev, x);
                if end > s {
                    out.push(Interval { lo: s, hi: end });
                }
                start = None;
            }
            _ => {}
        }
        prev = x;
    }
    if let Some(s) = start {
        if hi > s {
            out.push(Interval { lo: s, hi });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct WinnerRow {
    pub k: u32,
    pub nu: f64,
    pub winner: BoundId,
    pub exponent: f64,
}

/// Best proven bound at each `ν`; ties go to the earliest entry of [`BoundId::ALL`].
pub fn winner_map(k: u32, nu_grid: &[f64]) -> Result<Vec<WinnerRow>> {
    let candidates: Vec<(BoundId, Expr)> = BoundId::ALL
        .into_iter()
        .filter(|b| b.is_proven() && b.valid_for(k))
        .map(|b| Ok((b, bound_expr(b, k)?)))
        .collect::<Result<_>>()?;
    Ok(nu_grid
        .iter()
        .map(|&nu| {
            let mut best: Option<(BoundId, f64)> = None;
            for (id, e) in &candidates {
                let v = e.eval(&Value::Approx(nu)).to_f64();
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((*id, v));
                }
            }
            let (winner, exponent) = best.expect("no candidate bounds");
            WinnerRow { k, nu, winner, exponent }
        })
        .collect())
}

/// The crossover exponents of one `k`.
#[derive(Debug, Clone, Serialize)]
pub struct CrossoverReport {
    pub k: u32,
    /// Upper end of the range starting at `ν = k` where the Munsch bound beats Baier–Zhao.
    pub lambda: Option<f64>,
    /// Upper end of the range starting at `ν = k+1+2/(k-1)` where Munsch beats Halupczok.
    pub mu: Option<f64>,
    /// `mu` is the end of the search range `2k`, not a crossing.
    pub mu_capped: bool,
    /// Start of the range where the `k >= 5` theorem beats Munsch.
    pub sigma: Option<f64>,
    /// Upper end of the window; equal to `lambda`, beyond which Baier–Zhao takes over.
    pub tau: Option<f64>,
    /// Where the `k >= 5` theorem is strictly below every other proven bound.
    pub strict_window: Vec<Interval>,
}

impl CrossoverReport {
    pub fn window_nonempty(&self) -> Option<bool> {
        Some(self.sigma? < self.tau?)
    }
}

fn upper_end_from(ints: &[Interval], start: f64) -> Option<f64> {
    ints.iter().find(|i| (i.lo - start).abs() < 1e-9).map(|i| i.hi)
}

pub fn crossover_report(k: u32) -> Result<CrossoverReport> {
    check_k(k)?;
    let kf = k as f64;
    let lambda = upper_end_from(&crossover(BoundId::Munsch, BoundId::BaierZhao, k)?, kf);
    let mu = if k >= 3 {
        let start = kf + 1.0 + 2.0 / (kf - 1.0);
        upper_end_from(&crossover_on(BoundId::Munsch, BoundId::Halupczok, k, start, 2.0 * kf)?, start)
    } else {
        None
    };
    let (sigma, strict_window) = if k >= 5 {
        let s = crossover(BoundId::ThmK5, BoundId::Munsch, k)?.first().map(|i| i.lo);
        (s, strict_window(k)?)
    } else {
        (None, Vec::new())
    };
    let mu_capped = mu.is_some_and(|m| (m - 2.0 * kf).abs() < 1e-9);
    Ok(CrossoverReport { k, lambda, mu, mu_capped, sigma, tau: lambda, strict_window })
}

fn strict_window(k: u32) -> Result<Vec<Interval>> {
    let mine = bound_expr(BoundId::ThmK5, k)?;
    let others: Vec<Expr> = BoundId::ALL
        .into_iter()
        .filter(|b| b.is_proven() && b.valid_for(k) && *b != BoundId::ThmK5)
        .map(|b| bound_expr(b, k))
        .collect::<Result<_>>()?;
    let d = |nu: f64| {
        let v = Value::Approx(nu);
        let best_other = others.iter().map(|e| e.eval(&v).to_f64()).fold(f64::INFINITY, f64::min);
        mine.eval(&v).to_f64() - best_other
    };
    Ok(negative_intervals(d, k as f64, 2.0 * k as f64))
}

/// Level of distribution for Piatetski-Shapiro moduli, exact on rationals.
pub fn phi_alpha_exact(alpha: Rational) -> Result<Rational> {
    if alpha <= int(1) || alpha >= rat(9, 4) {
        bail!(Domain, "alpha = {alpha} outside (1, 9/4)");
    }
    Ok(if alpha < rat(26, 23) {
        int(3) * alpha / (int(10) * alpha - int(4))
    } else if alpha < int(2) {
        rat(13, 28)
    } else if alpha < rat(23, 11) {
        int(13) * alpha / (int(34) * alpha - int(12))
    } else {
        int(7) * alpha / (int(20) * alpha - int(10))
    })
}

pub fn phi_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.25) {
        bail!(Domain, "alpha = {alpha} outside (1, 9/4)");
    }
    Ok(if alpha < 26.0 / 23.0 {
        3.0 * alpha / (10.0 * alpha - 4.0)
    } else if alpha < 2.0 {
        13.0 / 28.0
    } else if alpha < 23.0 / 11.0 {
        13.0 * alpha / (34.0 * alpha - 12.0)
    } else {
        7.0 * alpha / (20.0 * alpha - 10.0)
    })
}

/// The left and right limits of each piece at the three breakpoints.
pub fn phi_breakpoint_limits() -> Vec<(Rational, Rational, Rational)> {
    let pieces: [fn(Rational) -> Rational; 4] = [
        |a| int(3) * a / (int(10) * a - int(4)),
        |_| rat(13, 28),
        |a| int(13) * a / (int(34) * a - int(12)),
        |a| int(7) * a / (int(20) * a - int(10)),
    ];
    [rat(26, 23), int(2), rat(23, 11)]
        .into_iter()
        .enumerate()
        .map(|(i, b)| (b, pieces[i](b), pieces[i + 1](b)))
        .collect()
}

/// Substitutes `E⁺ <= Q^2` and `E⁺_⋆ <= Q^{1+2/√k}` into the energy theorem
/// with `α = k` and compares with the `k >= 5` theorem piece by piece.
pub fn composition_identity_check(k: u32) -> Result<bool> {
    if k < 5 {
        bail!(Domain, "the composition needs k >= 5, got {k}");
    }
    let kf = k as f64;
    let composed = thm_energy_expr(
        Coef::Exact(int(k as i128)),
        EnergyExponents { e_plus: Coef::Exact(int(2)), e_star: Coef::Approx(1.0 + 2.0 / kf.sqrt()) },
    );
    let target = bound_expr(BoundId::ThmK5, k)?;
    let (p, q) = (composed.pieces(), target.pieces());
    Ok(p.len() == q.len()
        && p.iter().zip(&q).all(|(x, y)| {
            (x.c0.to_f64() - y.c0.to_f64()).abs() <= 1e-12 && (x.c1.to_f64() - y.c1.to_f64()).abs() <= 1e-12
        }))
}

/// Largest gap `|composed(ν) − thm_k5(ν)|` over `points` evenly spaced `ν` in `[k, 2k]`.
pub fn composition_gap(k: u32, points: usize) -> Result<f64> {
    if k < 5 {
        bail!(Domain, "the composition needs k >= 5, got {k}");
    }
    let kf = k as f64;
    let composed = thm_energy_expr(
        Coef::Exact(int(k as i128)),
        EnergyExponents { e_plus: Coef::Exact(int(2)), e_star: Coef::Approx(1.0 + 2.0 / kf.sqrt()) },
    );
    let target = bound_expr(BoundId::ThmK5, k)?;
    let n = points.max(2);
    Ok((0..n)
        .map(|i| {
            let nu = Value::Approx(kf + kf * i as f64 / (n - 1) as f64);
            (composed.eval(&nu).to_f64() - target.eval(&nu).to_f64()).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        assert_eq!(delta_exponent_exact(BoundId::Munsch, 2, int(3)).unwrap(), Value::Exact(rat(23, 6)));
        assert_eq!(delta_exponent_exact(BoundId::Trivial, 2, int(3)).unwrap(), Value::Exact(int(4)));
        assert_eq!(delta_exponent_exact(BoundId::Conjecture, 3, int(3)).unwrap(), Value::Exact(int(4)));
        assert!((delta_exponent(BoundId::Munsch, 2, 3.0).unwrap() - 23.0 / 6.0).abs() < 1e-15);
        assert!(delta_exponent(BoundId::ThmK5, 4, 5.0).is_err());
        assert!(delta_exponent(BoundId::BaierZhaoK3, 4, 5.0).is_err());
    }

    #[test]
    fn kappa_omega() {
        assert_eq!(kappa(5).unwrap(), 16);
        assert_eq!(omega(3).unwrap(), rat(1, 4));
        assert_eq!(omega(2).unwrap(), rat(1, 2));
        assert!(kappa(1).is_err());
        assert!(omega(0).is_err());
    }

    #[test]
    fn phi_examples_and_continuity() {
        assert_eq!(phi_alpha_exact(int(2)).unwrap(), rat(13, 28));
        assert_eq!(phi_alpha_exact(rat(26, 23)).unwrap(), rat(13, 28));
        assert_eq!(phi_alpha_exact(rat(3, 2)).unwrap(), rat(13, 28));
        for (_, left, right) in phi_breakpoint_limits() {
            assert_eq!(left, right);
        }
        assert!(phi_alpha(1.0).is_err());
        assert!(phi_alpha(2.25).is_err());
        assert!(phi_alpha_exact(rat(9, 4)).is_err());
    }

    #[test]
    fn crossover_claims() {
        for k in [5, 6] {
            assert_eq!(crossover_report(k).unwrap().window_nonempty(), Some(false), "k = {k}");
        }
        for k in 7..=12 {
            assert_eq!(crossover_report(k).unwrap().window_nonempty(), Some(true), "k = {k}");
        }
        for k in 8..=20 {
            let l = crossover_report(k).unwrap().lambda.unwrap();
            assert!((l - (2.0 * k as f64 - 2.0)).abs() <= 10.0 / k as f64);
        }
    }

    #[test]
    fn crossover_endpoints_are_equalities() {
        for k in 5..=12 {
            for i in crossover(BoundId::ThmK5, BoundId::Munsch, k).unwrap() {
                for x in [i.lo, i.hi] {
                    if x > k as f64 && x < 2.0 * k as f64 {
                        let d = delta_exponent(BoundId::ThmK5, k, x).unwrap() - delta_exponent(BoundId::Munsch, k, x).unwrap();
                        assert!(d.abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn winner_map_gating() {
        let grid: Vec<f64> = (0..=40).map(|i| 2.0 + i as f64 * 0.05).collect();
        assert!(winner_map(2, &grid).unwrap().iter().all(|r| r.winner != BoundId::ThmK5 && r.winner != BoundId::Conjecture));
        let k7 = winner_map(7, &[11.5, 12.2]).unwrap();
        assert_eq!(k7[0].winner, BoundId::Munsch);
        assert_eq!(k7[1].winner, BoundId::ThmK5);
        assert_ne!(winner_map(5, &[5.0]).unwrap()[0].winner, BoundId::Conjecture);
    }

    #[test]
    fn conjecture_is_the_envelope() {
        for k in 2..=12u32 {
            for i in 0..=200 {
                let nu = k as f64 * (1.0 + i as f64 / 200.0);
                let c = delta_exponent(BoundId::Conjecture, k, nu).unwrap();
                for id in BoundId::ALL.into_iter().filter(|b| b.is_proven() && b.valid_for(k)) {
                    assert!(delta_exponent(id, k, nu).unwrap() >= c - 1e-12, "{id} k={k} nu={nu}");
                }
            }
        }
    }

    #[test]
    fn composition() {
        assert!(composition_identity_check(5).unwrap());
        assert!(composition_identity_check(9).unwrap());
        assert!(composition_identity_check(4).is_err());
        assert!(composition_gap(7, 100).unwrap() <= 1e-12);
    }
}
