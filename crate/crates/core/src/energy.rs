//! Symmetric and asymmetric additive energies.
//!
//! `E⁺(S)` counts quadruples with `s₁ + t₁ = s₂ + t₂`, `E⁺_h(S)` those with
//! `s₁ + t₁ = s₂ + t₂ + h`, and `E⁺_⋆(S)` is the maximum of `E⁺_h` over
//! `h ≠ 0`. Everything here is exact integer counting.
//!
//! Inputs are sets: slices are sorted and deduplicated before counting.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::Serialize;

use crate::error::{bail, Result};

/// Largest set the quartic enumeration accepts.
pub const ORACLE_MAX: usize = 64;
/// Largest `max(S) - min(S)` the dense backend accepts.
pub const DENSE_SPAN_MAX: i128 = 1 << 26;
/// Shift tables with more entries than this are not materialized.
pub const H_TABLE_MAX: usize = 1_000_000;
const PARTITION_CHUNK: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnergyReport {
    pub n: usize,
    pub e_plus: u128,
    pub e_star: u128,
    /// Maximizing nonzero shift; `None` when no nonzero shift occurs (`n <= 1`).
    pub h_star: Option<i128>,
    #[serde(skip)]
    pub h_table: Option<BTreeMap<i128, u128>>,
}

impl EnergyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "e_plus": self.e_plus,
            "e_star": self.e_star,
            "h_star": self.h_star,
        })
    }

    /// Two-column CSV `(h, E_h)`; empty body when the table was not kept.
    pub fn write_h_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["h", "E_h"])?;
        if let Some(t) = &self.h_table {
            for (h, e) in t {
                w.write_record([h.to_string(), e.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sparse,
    Dense,
}

impl std::str::FromStr for Backend {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Backend::Sparse),
            "dense" => Ok(Backend::Dense),
            _ => bail!(Domain, "unknown energy backend {s:?} (expected sparse or dense)"),
        }
    }
}

fn normalize(s: &[i128]) -> Result<Vec<i128>> {
    const LIMIT: i128 = i128::MAX / 8;
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&x) = v.iter().find(|&&x| x.abs() > LIMIT) {
        bail!(Range, "element {x} too large: sums of four elements must fit 128 bits");
    }
    Ok(v)
}

/// Picks the best `(h, E_h)` under the tie-break "larger count, then smaller |h|, then positive h".
fn better(cand: (i128, u128), best: Option<(i128, u128)>) -> bool {
    match best {
        None => true,
        Some((bh, be)) => {
            cand.1 > be || (cand.1 == be && (cand.0.abs() < bh.abs() || (cand.0.abs() == bh.abs() && cand.0 > 0 && bh < 0)))
        }
    }
}

fn star_from_table(table: &BTreeMap<i128, u128>) -> (Option<i128>, u128) {
    let mut best = None;
    for (&h, &e) in table {
        if h != 0 && e > 0 && better((h, e), best) {
            best = Some((h, e));
        }
    }
    (best.map(|b| b.0), best.map_or(0, |b| b.1))
}

/// Literal enumeration of all `n⁴` quadruples; fills the complete shift table.
pub fn energy_oracle(s: &[i128]) -> Result<EnergyReport> {
    let s = normalize(s)?;
    if s.len() > ORACLE_MAX {
        bail!(Capacity, "oracle enumeration capped at {ORACLE_MAX} elements, got {}", s.len());
    }
    let mut table: HashMap<i128, u128> = HashMap::new();
    for &s1 in &s {
        for &t1 in &s {
            for &s2 in &s {
                for &t2 in &s {
                    *table.entry(s1 + t1 - s2 - t2).or_insert(0) += 1;
                }
            }
        }
    }
    let table: BTreeMap<i128, u128> = table.into_iter().collect();
    let e_plus = table.get(&0).copied().unwrap_or(0);
    let (h_star, e_star) = star_from_table(&table);
    Ok(EnergyReport { n: s.len(), e_plus, e_star, h_star, h_table: Some(table) })
}

/// `r(s) = #{(i, j) ordered : m_i + m_j = s}`.
pub fn representation_function(s: &[i128]) -> Result<BTreeMap<i128, u128>> {
    let s = normalize(s)?;
    let mut r = BTreeMap::new();
    for &a in &s {
        for &b in &s {
            *r.entry(a + b).or_insert(0u128) += 1;
        }
    }
    Ok(r)
}

pub fn additive_energy(s: &[i128]) -> Result<u128> {
    Ok(representation_function(s)?.values().map(|&r| r * r).sum())
}

/// `E⁺_h(S) = Σ_s r(s) r(s - h)`.
pub fn asymmetric_energy(s: &[i128], h: i128) -> Result<u128> {
    let r = representation_function(s)?;
    Ok(r.iter().map(|(&x, &rx)| rx * r.get(&(x - h)).copied().unwrap_or(0)).sum())
}

/// `(h_star, E⁺_⋆(S))`, searching every difference of two pairwise sums.
pub fn max_asymmetric_energy(s: &[i128]) -> Result<(i128, u128)> {
    let r: Vec<(i128, u128)> = representation_function(s)?.into_iter().collect();
    if r.len() < 2 {
        bail!(Domain, "E_star needs |S| >= 2 (no nonzero shift has a positive count)");
    }
    let mut shifts: HashMap<i128, u128> = HashMap::new();
    for (i, &(si, ri)) in r.iter().enumerate() {
        for &(sj, rj) in &r[..i] {
            *shifts.entry(si - sj).or_insert(0) += ri * rj;
        }
    }
    let mut best: Option<(i128, u128)> = None;
    for (h, e) in shifts {
        if better((h, e), best) {
            best = Some((h, e));
        }
    }
    Ok(best.expect("at least one positive shift"))
}

/// Fast exact energies.
///
/// `Sparse` aggregates the `n(n+1)/2` unordered pair sums by sorting and
/// correlates the distinct sums in shift partitions (`h mod B`) so memory stays
/// bounded. `Dense` convolves the indicator array into a representation array
/// and accumulates the correlation into an array indexed by shift.
pub fn energy_fast(s: &[i128], backend: Backend) -> Result<EnergyReport> {
    let s = normalize(s)?;
    match backend {
        Backend::Sparse => sparse(&s),
        Backend::Dense => dense(&s),
    }
}

fn mirror_table(pos: Vec<(i128, u128)>, e_plus: u128) -> BTreeMap<i128, u128> {
    let mut t = BTreeMap::new();
    t.insert(0, e_plus);
    for (h, e) in pos {
        t.insert(h, e);
        t.insert(-h, e);
    }
    t
}

fn sparse(s: &[i128]) -> Result<EnergyReport> {
    let n = s.len();
    if n == 0 {
        return Ok(EnergyReport { n, e_plus: 0, e_star: 0, h_star: None, h_table: Some(BTreeMap::new()) });
    }
    let mut pairs: Vec<(i128, u128)> = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        pairs.push((2 * s[i], 1));
        for j in i + 1..n {
            pairs.push((s[i] + s[j], 2));
        }
    }
    pairs.sort_unstable_by_key(|p| p.0);
    let mut r: Vec<(i128, u128)> = Vec::new();
    for (x, w) in pairs {
        match r.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => r.push((x, w)),
        }
    }
    let e_plus: u128 = r.iter().map(|&(_, c)| c * c).sum();

    let d = r.len();
    let total_pairs = d * d.saturating_sub(1) / 2;
    let buckets = total_pairs.div_ceil(PARTITION_CHUNK).max(1) as i128;
    let mut best: Option<(i128, u128)> = None;
    let mut kept: Option<Vec<(i128, u128)>> = Some(Vec::new());
    let mut chunk: Vec<(i128, u128)> = Vec::new();
    for b in 0..buckets {
        chunk.clear();
        for (i, &(si, ri)) in r.iter().enumerate() {
            for &(sj, rj) in &r[..i] {
                let h = si - sj;
                if h.rem_euclid(buckets) == b {
                    chunk.push((h, ri * rj));
                }
            }
        }
        chunk.sort_unstable_by_key(|c| c.0);
        let mut k = 0;
        while k < chunk.len() {
            let h = chunk[k].0;
            let mut e = 0u128;
            while k < chunk.len() && chunk[k].0 == h {
                e += chunk[k].1;
                k += 1;
            }
            if better((h, e), best) {
                best = Some((h, e));
            }
            if let Some(t) = kept.as_mut() {
                t.push((h, e));
                if 2 * t.len() + 1 > H_TABLE_MAX {
                    kept = None;
                }
            }
        }
    }
    Ok(EnergyReport {
        n,
        e_plus,
        e_star: best.map_or(0, |b| b.1),
        h_star: best.map(|b| b.0),
        h_table: kept.map(|t| mirror_table(t, e_plus)),
    })
}

fn dense(s: &[i128]) -> Result<EnergyReport> {
    let n = s.len();
    if n == 0 {
        return Ok(EnergyReport { n, e_plus: 0, e_star: 0, h_star: None, h_table: Some(BTreeMap::new()) });
    }
    let (lo, hi) = (s[0], s[n - 1]);
    let span = hi - lo;
    if span > DENSE_SPAN_MAX {
        bail!(
            Capacity,
            "dense backend needs max(S) - min(S) <= 2^26, got {span}; use the sparse backend"
        );
    }
    let span = span as usize;
    let mut indicator = vec![0u64; span + 1];
    for &x in s {
        indicator[(x - lo) as usize] = 1;
    }
    // r = indicator * indicator, indexed by s - 2 lo
    let mut r = vec![0u64; 2 * span + 1];
    let support: Vec<usize> = (0..=span).filter(|&i| indicator[i] != 0).collect();
    for &i in &support {
        for &j in &support {
            r[i + j] += indicator[i] * indicator[j];
        }
    }
    let e_plus: u128 = r.iter().map(|&c| c as u128 * c as u128).sum();
    let nz: Vec<usize> = (0..r.len()).filter(|&i| r[i] != 0).collect();
    let mut corr = vec![0u128; 2 * span + 1];
    for (a, &i) in nz.iter().enumerate() {
        for &j in &nz[..a] {
            corr[i - j] += r[i] as u128 * r[j] as u128;
        }
    }
    let mut best: Option<(i128, u128)> = None;
    let mut pos = Vec::new();
    for (h, &e) in corr.iter().enumerate().skip(1) {
        if e > 0 {
            if best.is_none_or(|b| e > b.1) {
                best = Some((h as i128, e));
            }
            pos.push((h as i128, e));
        }
    }
    let table = (2 * pos.len() < H_TABLE_MAX).then(|| mirror_table(pos, e_plus));
    Ok(EnergyReport { n, e_plus, e_star: best.map_or(0, |b| b.1), h_star: best.map(|b| b.0), h_table: table })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_routes(s: &[i128]) -> Vec<EnergyReport> {
        vec![
            energy_oracle(s).unwrap(),
            energy_fast(s, Backend::Sparse).unwrap(),
            energy_fast(s, Backend::Dense).unwrap(),
        ]
    }

    #[test]
    fn pair_set() {
        let rep = energy_oracle(&[1, 2]).unwrap();
        assert_eq!(rep.e_plus, 6);
        assert_eq!((rep.h_star, rep.e_star), (Some(1), 4));
        let t = rep.h_table.unwrap();
        assert_eq!(t.get(&-1), Some(&4));
        assert_eq!(t.get(&2), Some(&1));
        assert_eq!(t.get(&-2), Some(&1));
        assert_eq!(additive_energy(&[1, 2]).unwrap(), 6);
        assert_eq!(asymmetric_energy(&[1, 2], 1).unwrap(), 4);
        assert_eq!(asymmetric_energy(&[1, 2], 10).unwrap(), 0);
        assert_eq!(max_asymmetric_energy(&[1, 2]).unwrap(), (1, 4));
        assert_eq!(energy_fast(&[1, 2], Backend::Dense).unwrap().e_plus, 6);
    }

    #[test]
    fn singleton() {
        let rep = energy_oracle(&[5]).unwrap();
        assert_eq!((rep.e_plus, rep.e_star, rep.h_star), (1, 0, None));
        assert_eq!(additive_energy(&[5]).unwrap(), 1);
        assert_eq!(additive_energy(&[-17]).unwrap(), 1);
        assert!(max_asymmetric_energy(&[5]).is_err());
        for r in all_routes(&[5]) {
            assert_eq!((r.e_plus, r.e_star, r.h_star), (1, 0, None));
        }
    }

    #[test]
    fn squares_and_sidon() {
        let sq = [1, 4, 9, 16];
        let r = representation_function(&sq).unwrap();
        let expected: BTreeMap<i128, u128> =
            [(2, 1), (5, 2), (8, 1), (10, 2), (13, 2), (17, 2), (18, 1), (20, 2), (25, 2), (32, 1)].into();
        assert_eq!(r, expected);
        assert_eq!(additive_energy(&sq).unwrap(), 28);
        assert_eq!(asymmetric_energy(&sq, 0).unwrap(), 28);
        let (h, e) = max_asymmetric_energy(&sq).unwrap();
        assert!(e <= 28);
        assert_eq!(asymmetric_energy(&sq, h).unwrap(), e);
        for rep in all_routes(&sq) {
            assert_eq!(rep.e_plus, 28);
            assert_eq!((rep.h_star, rep.e_star), (Some(h), e));
        }
        let sidon = [1, 2, 5, 11];
        let o = energy_oracle(&sidon).unwrap();
        assert_eq!(o.e_plus, 28);
        assert!(o.e_star <= o.e_plus);
    }

    #[test]
    fn duplicates_are_ignored() {
        assert_eq!(additive_energy(&[3, 1, 3, 2, 1]).unwrap(), additive_energy(&[1, 2, 3]).unwrap());
    }

    #[test]
    fn capacity_errors() {
        let big: Vec<i128> = (0..65).collect();
        assert!(matches!(energy_oracle(&big), Err(crate::Error::Capacity(_))));
        assert!(matches!(energy_fast(&[0, 1 << 27], Backend::Dense), Err(crate::Error::Capacity(m)) if m.contains("sparse")));
        assert!(matches!(additive_energy(&[i128::MAX / 2]), Err(crate::Error::Range(_))));
    }

    #[test]
    fn tables_agree_between_oracle_and_fast() {
        let s = [0, 3, 7, 8, 20, -4];
        let o = energy_oracle(&s).unwrap();
        let sp = energy_fast(&s, Backend::Sparse).unwrap();
        let de = energy_fast(&s, Backend::Dense).unwrap();
        assert_eq!(o.h_table, sp.h_table);
        assert_eq!(o.h_table, de.h_table);
    }

    #[test]
    fn json_and_csv() {
        let rep = energy_fast(&[1, 2], Backend::Sparse).unwrap();
        assert_eq!(rep.to_json().to_string(), r#"{"e_plus":6,"e_star":4,"h_star":1,"n":2}"#);
        let mut buf = Vec::new();
        rep.write_h_table_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "h,E_h\n-2,1\n-1,4\n0,6\n1,4\n2,1\n");
    }
}
