//! Congruence box counts and spacing of Farey fractions with sparse denominators.

use std::cmp::Ordering;
use std::io::Write;

use num_rational::Ratio;
use serde::Serialize;

use crate::arith::gcd_u128;
use crate::energy::{energy_fast, Backend};
use crate::error::{bail, Result};
use crate::moduli::{mulmod, IntPolynomial, ModuliSequence};

/// Denominators and `N` must stay below this so exact cross-multiplied
/// comparisons fit 128 bits.
pub const EXACT_LIMIT: u128 = 1 << 40;
/// Cap on the number of Farey fractions materialized.
pub const FAREY_BUDGET: u128 = 50_000_000;

/// Distance from `x` to the nearest integer.
pub fn torus_distance(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

/// Representative of `r mod m` in `(-m/2, m/2]`.
pub fn centered(r: u128, m: u128) -> i128 {
    if 2 * r <= m {
        r as i128
    } else {
        r as i128 - m as i128
    }
}

fn check_unit(a: i128, m: u128) -> Result<u128> {
    if m == 0 {
        bail!(Domain, "modulus m must be positive");
    }
    if gcd_u128(a.unsigned_abs(), m) != 1 {
        bail!(Precondition, "gcd(a = {a}, m = {m}) != 1");
    }
    Ok(a.rem_euclid(m as i128) as u128)
}

fn count_centered(residues: impl Iterator<Item = u128>, m: u128, v: u128) -> u64 {
    residues.filter(|&r| centered(r, m).unsigned_abs() <= v).count() as u64
}

/// `T_a(m; 𝐦, U, V)`: solutions of `a m_j ≡ v (mod m)` with `1 <= j <= U`, `|v| <= V`.
pub fn count_box_solutions(a: i128, m: u128, seq: &ModuliSequence, u: usize, v: u128) -> Result<u64> {
    let a = check_unit(a, m)?;
    let vals = seq.prefix(u)?;
    Ok(count_centered(vals.iter().map(|&mj| mulmod(a, mj % m, m)), m, v))
}

/// Solutions of `a f(u) ≡ v (mod m)` with `1 <= u <= U`, `|v| <= V`.
pub fn count_poly_box(a: i128, m: u128, f: &IntPolynomial, u: u64, v: u128) -> Result<u64> {
    let a = check_unit(a, m)?;
    Ok(count_centered((1..=u as i128).map(|x| mulmod(a, f.eval_mod(x, m), m)), m, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FareyFraction {
    pub a: u128,
    pub m: u128,
}

impl FareyFraction {
    pub fn value(&self) -> f64 {
        self.a as f64 / self.m as f64
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        (self.a * other.m).cmp(&(other.a * self.m))
    }
}

/// Reduced fractions `a / m_j`, `1 <= a < m_j`, `Q <= j <= 2Q`, as torus points.
#[derive(Debug, Clone)]
pub struct FareySet {
    /// Distinct points in ascending order.
    pub points: Vec<FareyFraction>,
    /// Number of `(a, m_j)` labels, i.e. `Σ_j φ(m_j)`.
    pub labels: usize,
}

impl FareySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn farey_set(seq: &ModuliSequence, q: usize) -> Result<FareySet> {
    if q == 0 {
        bail!(Domain, "Q must be >= 1");
    }
    let dens = seq.prefix(2 * q)?[q - 1..].to_vec();
    farey_from_denominators(&dens)
}

pub fn farey_from_denominators(dens: &[u128]) -> Result<FareySet> {
    let total: u128 = dens.iter().sum();
    if total > FAREY_BUDGET {
        bail!(Capacity, "Farey enumeration over denominators summing to {total} exceeds {FAREY_BUDGET}");
    }
    if let Some(m) = dens.iter().find(|&&m| m >= EXACT_LIMIT) {
        bail!(Capacity, "denominator {m} exceeds the exact comparison limit 2^40");
    }
    let mut points = Vec::new();
    for &m in dens {
        for a in 1..m {
            if gcd_u128(a, m) == 1 {
                points.push(FareyFraction { a, m });
            }
        }
    }
    let labels = points.len();
    points.sort_by(|x, y| x.cmp_value(y));
    points.dedup_by(|x, y| x.cmp_value(y) == Ordering::Equal);
    Ok(FareySet { points, labels })
}

/// Is the forward torus distance from `x` to `y` (going up, wrapping past 1)
/// strictly less than `1/(2N)`?
fn forward_within(x: &FareyFraction, y: &FareyFraction, wrapped: bool, n: u128) -> bool {
    // d = y - x (+1 if wrapped) = num / (x.m y.m)
    let num = y.a as i128 * x.m as i128 - x.a as i128 * y.m as i128 + if wrapped { (x.m * y.m) as i128 } else { 0 };
    debug_assert!(num >= 0);
    2 * n as i128 * num < (x.m * y.m) as i128
}

/// For each point, the number of points strictly after it (cyclically) whose
/// forward torus distance is below `1/(2N)`.
fn forward_counts(points: &[FareyFraction], n: u128) -> Vec<usize> {
    let p = points.len();
    let mut fwd = vec![0usize; p];
    let mut hi = 0usize;
    for i in 0..p {
        hi = hi.max(i);
        while hi + 1 < i + p && forward_within(&points[i], &points[(hi + 1) % p], hi + 1 >= p, n) {
            hi += 1;
        }
        fwd[i] = hi - i;
    }
    fwd
}

/// `max_x #{y : ⟨x - y⟩ < 1/(2N)}` over a sorted point set (`y = x` included).
///
/// Two-pointer sweep over the circle; the backward neighbourhood is the
/// forward one of the reflected set `x ↦ 1 - x`. Forward and backward sets are
/// disjoint because a point cannot be closer than 1/2 in both directions.
pub fn max_neighborhood(points: &[FareyFraction], n: u128) -> Result<u64> {
    if n == 0 {
        bail!(Domain, "N must be >= 1");
    }
    if n >= EXACT_LIMIT {
        bail!(Capacity, "N = {n} exceeds the exact comparison limit 2^40");
    }
    let p = points.len();
    if p == 0 {
        return Ok(0);
    }
    let fwd = forward_counts(points, n);
    let reflected: Vec<FareyFraction> = points.iter().rev().map(|f| FareyFraction { a: f.m - f.a, m: f.m }).collect();
    let bwd = forward_counts(&reflected, n);
    let best = (0..p).map(|i| 1 + fwd[i] + bwd[p - 1 - i]).max().unwrap_or(0);
    Ok(best.min(p) as u64)
}

/// `M(𝐦; N, Q)`.
pub fn spacing_count(seq: &ModuliSequence, n: u128, q: usize) -> Result<u64> {
    max_neighborhood(&farey_set(seq, q)?.points, n)
}

/// Smallest torus distance between two distinct points, as an exact fraction.
pub fn min_torus_distance(points: &[FareyFraction]) -> Option<Ratio<i128>> {
    if points.len() < 2 {
        return None;
    }
    let frac = |f: &FareyFraction| Ratio::new(f.a as i128, f.m as i128);
    let mut best = frac(&points[0]) + Ratio::from_integer(1) - frac(points.last().unwrap());
    for w in points.windows(2) {
        best = best.min(frac(&w[1]) - frac(&w[0]));
    }
    Some(best)
}

/// One row of an audit that compares a measured count with a two-term bound.
#[derive(Debug, Clone, Serialize)]
pub struct AuditRow {
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(rename = "N")]
    pub n: u128,
    pub measured: f64,
    pub term1: f64,
    pub term2: f64,
    pub ratio: f64,
}

/// Measured spacing count against `E⁺(𝐦_Q)^{1/4} + N^{-1/4} Q^{α/2} E⁺_⋆(𝐦_Q)^{1/4}`
/// (energies over the first `Q` moduli, `o(1)` dropped).
pub fn lemma_fracgen_audit(seq: &ModuliSequence, n: u128, q: usize) -> Result<AuditRow> {
    let alpha = seq.alpha_hint();
    let (qf, nf) = (q as f64, n as f64);
    let slack = 1e-9;
    if nf < qf.powf(alpha) * (1.0 - slack) || nf > qf.powf(2.0 * alpha) * (1.0 + slack) {
        bail!(Domain, "N = {n} outside [Q^alpha, Q^(2 alpha)] for Q = {q}, alpha = {alpha}");
    }
    let measured = spacing_count(seq, n, q)? as f64;
    let set: Vec<i128> = seq.prefix(q)?.iter().map(|&m| m as i128).collect();
    let rep = energy_fast(&set, Backend::Sparse)?;
    let term1 = (rep.e_plus as f64).powf(0.25);
    let term2 = nf.powf(-0.25) * qf.powf(alpha / 2.0) * (rep.e_star as f64).powf(0.25);
    Ok(AuditRow { q: q as u64, n, measured, term1, term2, ratio: measured / (term1 + term2) })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxAuditRow {
    pub a: i128,
    pub m: u128,
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "V")]
    pub v: u128,
    pub measured: u64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `T_a(m; 𝐦, U, V)` against `E⁺(𝐦_U)^{1/4} + (U^α/m + 1)^{1/4} V^{1/4} E⁺_⋆(𝐦_U)^{1/4}`.
pub fn box_audit(seq: &ModuliSequence, cells: &[(i128, u128)], u: usize, v: u128) -> Result<Vec<BoxAuditRow>> {
    let set: Vec<i128> = seq.prefix(u)?.iter().map(|&m| m as i128).collect();
    let rep = energy_fast(&set, Backend::Sparse)?;
    let e1 = (rep.e_plus as f64).powf(0.25);
    let e2 = (rep.e_star as f64).powf(0.25);
    let alpha = seq.alpha_hint();
    let mut rows = Vec::with_capacity(cells.len());
    for &(a, m) in cells {
        let measured = count_box_solutions(a, m, seq, u, v)?;
        let rhs = e1 + ((u as f64).powf(alpha) / m as f64 + 1.0).powf(0.25) * (v as f64).powf(0.25) * e2;
        rows.push(BoxAuditRow { a, m, u, v, measured, rhs, ratio: measured as f64 / rhs });
    }
    Ok(rows)
}

/// `M̃_f(N, Q)` against `Q^{k+1}/N + Q^{1-1/κ} + Q^{1+k/κ} N^{-1/κ}` with `κ = 2^{k-1}`.
/// `term1` carries the first summand, `term2` the other two.
pub fn lemma_poly_audit(f: &IntPolynomial, n: u128, q: usize) -> Result<AuditRow> {
    let k = f.degree();
    if k < 2 {
        bail!(Domain, "polynomial degree must be >= 2");
    }
    let seq = crate::moduli::generate_polynomial(f, 2 * q as u64)?;
    let measured = spacing_count(&seq, n, q)? as f64;
    let kappa = 2f64.powi(k as i32 - 1);
    let (qf, nf, kf) = (q as f64, n as f64, k as f64);
    let term1 = qf.powf(kf + 1.0) / nf;
    let term2 = qf.powf(1.0 - 1.0 / kappa) + qf.powf(1.0 + kf / kappa) * nf.powf(-1.0 / kappa);
    Ok(AuditRow { q: q as u64, n, measured, term1, term2, ratio: measured / (term1 + term2) })
}

pub fn write_audit_csv<W: Write>(rows: &[AuditRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::generate_power;

    fn squares(q: u64) -> ModuliSequence {
        generate_power(2, q).unwrap()
    }

    fn brute_neighborhood(points: &[FareyFraction], n: u128) -> u64 {
        let w = Ratio::new(1i128, 2 * n as i128);
        let half = Ratio::new(1i128, 2);
        let one = Ratio::from_integer(1i128);
        points
            .iter()
            .map(|x| {
                points
                    .iter()
                    .filter(|y| {
                        let mut d = Ratio::new(x.a as i128, x.m as i128) - Ratio::new(y.a as i128, y.m as i128);
                        if d < Ratio::from_integer(0) {
                            d = -d;
                        }
                        if d > half {
                            d = one - d;
                        }
                        d < w
                    })
                    .count() as u64
            })
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn box_examples() {
        assert_eq!(count_box_solutions(1, 7, &squares(5), 5, 1).unwrap(), 1);
        assert_eq!(count_box_solutions(3, 7, &squares(5), 5, 4).unwrap(), 5);
        assert_eq!(count_box_solutions(1, 5, &squares(4), 4, 0).unwrap(), 0);
        assert!(matches!(count_box_solutions(2, 8, &squares(4), 4, 1), Err(crate::Error::Precondition(_))));
    }

    #[test]
    fn even_modulus_keeps_positive_half() {
        // residue m/2 maps to +m/2, so V = m/2 covers everything
        assert_eq!(centered(4, 8), 4);
        assert_eq!(centered(5, 8), -3);
        let seq = ModuliSequence::explicit(vec![4, 12], None).unwrap();
        assert_eq!(count_box_solutions(1, 8, &seq, 2, 3).unwrap(), 0);
        assert_eq!(count_box_solutions(1, 8, &seq, 2, 4).unwrap(), 2);
    }

    #[test]
    fn poly_box_examples() {
        assert_eq!(count_poly_box(1, 7, &IntPolynomial::monomial(2), 5, 1).unwrap(), 1);
        assert_eq!(count_poly_box(1, 10, &IntPolynomial::monomial(1), 10, 2).unwrap(), 5);
        assert_eq!(count_poly_box(3, 11, &"1,1,1".parse().unwrap(), 17, 6).unwrap(), 17);
    }

    #[test]
    fn farey_examples() {
        let s = farey_set(&squares(2), 1).unwrap();
        assert_eq!(s.points, vec![FareyFraction { a: 1, m: 4 }, FareyFraction { a: 3, m: 4 }]);
        assert_eq!(farey_set(&squares(4), 2).unwrap().labels, 16);
        let e = ModuliSequence::explicit(vec![2, 3], None).unwrap();
        let s = farey_set(&e, 1).unwrap();
        let vals: Vec<(u128, u128)> = s.points.iter().map(|f| (f.a, f.m)).collect();
        assert_eq!(vals, vec![(1, 3), (1, 2), (2, 3)]);
        assert!(farey_set(&squares(3), 2).is_err());
    }

    #[test]
    fn spacing_examples() {
        // 1/4 and 3/4 sit at torus distance exactly 1/2, which is not < 1/(2N)
        assert_eq!(spacing_count(&squares(2), 1, 1).unwrap(), 1);
        assert_eq!(spacing_count(&squares(2), 1, 1).unwrap(), brute_neighborhood(&farey_set(&squares(2), 1).unwrap().points, 1));
        let e = ModuliSequence::explicit(vec![2, 3], None).unwrap();
        // centred at 1/2, both 1/3 and 2/3 are within 1/6 < 1/4
        assert_eq!(spacing_count(&e, 2, 1).unwrap(), 3);
        let sq = squares(8);
        let big_n = 16u128.pow(2) * 16u128.pow(2) + 1;
        assert_eq!(spacing_count(&sq, big_n, 4).unwrap(), 1);
    }

    #[test]
    fn sweep_matches_brute_force() {
        for q in 1..=4usize {
            for seq in [squares(8), generate_power(3, 6).unwrap(), ModuliSequence::explicit(vec![2, 3, 5, 6, 7, 10, 11, 12], None).unwrap()] {
                if 2 * q > seq.len() {
                    continue;
                }
                let set = farey_set(&seq, q).unwrap();
                for n in [1u128, 2, 3, 5, 8, 13, 40, 200, 5000] {
                    assert_eq!(max_neighborhood(&set.points, n).unwrap(), brute_neighborhood(&set.points, n), "q={q} n={n}");
                }
            }
        }
    }

    #[test]
    fn min_distance_threshold() {
        let set = farey_set(&squares(8), 3).unwrap();
        let d = min_torus_distance(&set.points).unwrap();
        // 1/(2N) < d  <=>  N > 1/(2d)
        let n_crit = (Ratio::from_integer(1) / (d * 2)).to_integer() as u128 + 1;
        assert_eq!(max_neighborhood(&set.points, n_crit).unwrap(), 1);
        assert!(max_neighborhood(&set.points, n_crit - 1).unwrap() >= 1);
    }

    #[test]
    fn fracgen_audit_rows() {
        let row = lemma_fracgen_audit(&squares(16), 64, 8).unwrap();
        assert!(row.measured >= 1.0 && row.term1 > 0.0 && row.term2 > 0.0);
        let cubes = generate_power(3, 8).unwrap();
        let row = lemma_fracgen_audit(&cubes, 64, 4).unwrap();
        assert!(row.ratio > 0.0);
        assert!(matches!(lemma_fracgen_audit(&squares(16), 10, 8), Err(crate::Error::Domain(_))));
        assert!(lemma_fracgen_audit(&squares(16), 4097, 8).is_err());
    }
}
