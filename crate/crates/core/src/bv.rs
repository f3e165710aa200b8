//! Bombieri–Vinogradov experiment over Piatetski-Shapiro moduli.
//!
//! `E(x, q, a) = Σ_{n<=x, n≡a (q)} Λ(n) − x/φ(q)`. Λ-sums are accumulated in
//! [`FixedSum`], so they are exact functions of the summed set and do not
//! depend on traversal order or thread count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{divisors, euler_phi, gcd_u128, FixedSum};
use crate::bounds::phi_alpha;
use crate::error::{bail, Error, Result};
use crate::moduli::{is_ps_member, window, Alpha};

/// Largest table the builder accepts by default.
pub const X_MAX_LIMIT: u64 = 1_000_000_000;
const SEGMENT: u64 = 1 << 18;
const CACHE_MAGIC: &[u8; 8] = b"SSVPRIME";
const CACHE_VERSION: u32 = 1;

/// Primality bitset for `n <= x_max` plus the proper prime powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeTable {
    x_max: u64,
    bits: Vec<u64>,
    /// `(p^e, p)` for `e >= 2`, ascending.
    prime_powers: Vec<(u64, u64)>,
}

fn simple_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

impl PrimeTable {
    pub fn build(x: u64) -> Result<Self> {
        Self::build_with_limit(x, X_MAX_LIMIT)
    }

    pub fn build_with_limit(x: u64, limit: u64) -> Result<Self> {
        if x > limit {
            bail!(Capacity, "prime table up to x = {x} exceeds the budget {limit}");
        }
        let mut bits = vec![0u64; (x / 64 + 1) as usize];
        let base = simple_sieve(crate::arith::isqrt(x as u128) as u64);
        let mut lo = 0u64;
        let mut seg = vec![true; SEGMENT as usize];
        while lo <= x {
            let hi = (lo + SEGMENT - 1).min(x);
            let len = (hi - lo + 1) as usize;
            seg[..len].fill(true);
            for &p in &base {
                if p * p > hi {
                    break;
                }
                let start = (p * p).max(lo.div_ceil(p) * p);
                let mut m = start;
                while m <= hi {
                    seg[(m - lo) as usize] = false;
                    m += p;
                }
            }
            for (i, &is_p) in seg[..len].iter().enumerate() {
                let n = lo + i as u64;
                if is_p && n >= 2 {
                    bits[(n / 64) as usize] |= 1 << (n % 64);
                }
            }
            lo = hi + 1;
        }
        let mut prime_powers = Vec::new();
        for &p in &base {
            let mut q = p * p;
            while q <= x {
                prime_powers.push((q, p));
                match q.checked_mul(p) {
                    Some(next) => q = next,
                    None => break,
                }
            }
        }
        prime_powers.sort_unstable();
        Ok(PrimeTable { x_max: x, bits, prime_powers })
    }

    pub fn x_max(&self) -> u64 {
        self.x_max
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n <= self.x_max && self.bits[(n / 64) as usize] >> (n % 64) & 1 == 1
    }

    /// `π(x)` for `x <= x_max`.
    pub fn prime_count(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        let full = (x / 64) as usize;
        let mut c: u64 = self.bits[..full].iter().map(|w| w.count_ones() as u64).sum();
        let rem = x % 64;
        let mask = if rem == 63 { u64::MAX } else { (1u64 << (rem + 1)) - 1 };
        c += (self.bits[full] & mask).count_ones() as u64;
        Ok(c)
    }

    /// The prime `p` with `n = p^e`, `e >= 1`.
    pub fn prime_power_base(&self, n: u64) -> Option<u64> {
        if self.is_prime(n) {
            return Some(n);
        }
        self.prime_powers.binary_search_by_key(&n, |e| e.0).ok().map(|i| self.prime_powers[i].1)
    }

    pub fn lambda(&self, n: u64) -> f64 {
        self.prime_power_base(n).map_or(0.0, |p| (p as f64).ln())
    }

    fn check(&self, x: u64) -> Result<()> {
        if x > self.x_max {
            bail!(Range, "x = {x} exceeds the prime table limit {}", self.x_max);
        }
        Ok(())
    }

    /// All `(n, p)` with `n = p^e <= x`, ascending in `n`.
    pub fn prime_powers_upto(&self, x: u64) -> Result<Vec<(u64, u64)>> {
        self.check(x)?;
        let mut out = Vec::new();
        let mut pp = self.prime_powers.iter().copied().take_while(|e| e.0 <= x).peekable();
        for (w, &word) in self.bits.iter().enumerate() {
            let mut bitsw = word;
            while bitsw != 0 {
                let n = w as u64 * 64 + bitsw.trailing_zeros() as u64;
                if n > x {
                    break;
                }
                while let Some(&e) = pp.peek() {
                    if e.0 < n {
                        out.push(e);
                        pp.next();
                    } else {
                        break;
                    }
                }
                out.push((n, n));
                bitsw &= bitsw - 1;
            }
            if (w as u64 + 1) * 64 > x {
                break;
            }
        }
        out.extend(pp);
        Ok(out)
    }

    /// `(n, Λ(n))` for every prime power `n <= x`, as fixed-point terms.
    pub fn lambda_terms(&self, x: u64) -> Result<Vec<(u64, FixedSum)>> {
        Ok(self.prime_powers_upto(x)?.into_iter().map(|(n, p)| (n, FixedSum::term((p as f64).ln()))).collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.x_max.to_le_bytes())?;
        w.write_all(&(self.bits.len() as u64).to_le_bytes())?;
        for word in &self.bits {
            w.write_all(&word.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            bail!(Validation, "{} is not a prime table cache", path.display());
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != CACHE_VERSION {
            bail!(Validation, "prime table cache version {version}, expected {CACHE_VERSION}");
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let x_max = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let words = u64::from_le_bytes(b8);
        if words != x_max / 64 + 1 {
            bail!(Validation, "prime table cache is truncated or inconsistent");
        }
        let mut bits = Vec::with_capacity(words as usize);
        for _ in 0..words {
            r.read_exact(&mut b8)?;
            bits.push(u64::from_le_bytes(b8));
        }
        let mut t = PrimeTable { x_max, bits, prime_powers: Vec::new() };
        let base: Vec<u64> = (2..=crate::arith::isqrt(x_max as u128) as u64).filter(|&p| t.is_prime(p)).collect();
        for p in base {
            let mut q = p * p;
            while q <= x_max {
                t.prime_powers.push((q, p));
                match q.checked_mul(p) {
                    Some(next) => q = next,
                    None => break,
                }
            }
        }
        t.prime_powers.sort_unstable();
        Ok(t)
    }

    pub fn cache_path(dir: &Path, x_max: u64) -> PathBuf {
        dir.join(format!("primes-{x_max}.v{CACHE_VERSION}.bin"))
    }

    /// Loads `primes-{x}` from `dir` if present, otherwise builds and stores it.
    pub fn load_or_build(dir: &Path, x: u64) -> Result<Self> {
        let path = Self::cache_path(dir, x);
        if path.exists() {
            let t = Self::load(&path)?;
            if t.x_max == x {
                return Ok(t);
            }
        }
        let t = Self::build(x)?;
        std::fs::create_dir_all(dir)?;
        t.save(&path)?;
        Ok(t)
    }
}

/// `Σ_{n<=x, n≡a (q)} Λ(n)` as an exact fixed-point sum.
pub fn lambda_sum_fixed(table: &PrimeTable, x: u64, q: u64, a: u64) -> Result<FixedSum> {
    if q == 0 {
        bail!(Domain, "q must be >= 1");
    }
    table.check(x)?;
    let r = a % q;
    let mut acc = FixedSum::zero();
    let mut n = if r == 0 { q } else { r };
    while n <= x {
        if let Some(p) = table.prime_power_base(n) {
            acc.add((p as f64).ln());
        }
        n += q;
    }
    Ok(acc)
}

pub fn lambda_sum_progression(table: &PrimeTable, x: u64, q: u64, a: u64) -> Result<f64> {
    Ok(lambda_sum_fixed(table, x, q, a)?.to_f64())
}

pub fn error_term(table: &PrimeTable, x: u64, q: u64, a: u64) -> Result<f64> {
    if q == 0 {
        bail!(Domain, "q must be >= 1");
    }
    if gcd_u128(a as u128, q as u128) != 1 {
        bail!(Precondition, "gcd(a = {a}, q = {q}) != 1");
    }
    let phi = euler_phi(q as u128)? as f64;
    Ok(lambda_sum_progression(table, x, q, a)? - x as f64 / phi)
}

/// Λ-sums of every residue class mod `q`, from a precomputed term list.
fn bucket_sums(terms: &[(u64, FixedSum)], q: u64) -> Vec<FixedSum> {
    let mut b = vec![FixedSum::zero(); q as usize];
    for &(n, v) in terms {
        b[(n % q) as usize].add_fixed(v);
    }
    b
}

fn worst_from_buckets(buckets: &[FixedSum], x: u64, q: u64) -> Result<(u64, f64)> {
    let main = x as f64 / euler_phi(q as u128)? as f64;
    let mut best: Option<(u64, f64)> = None;
    for a in 1..=q {
        if gcd_u128(a as u128, q as u128) != 1 {
            continue;
        }
        let e = buckets[(a % q) as usize].to_f64() - main;
        if best.is_none_or(|(_, b)| e.abs() > b.abs()) {
            best = Some((a, e));
        }
    }
    Ok(best.expect("q >= 1 has a reduced residue"))
}

/// `(a*, E(x, q, a*))` maximizing `|E|` over reduced residues; ties go to the smallest `a`.
pub fn worst_residue(table: &PrimeTable, x: u64, q: u64) -> Result<(u64, f64)> {
    if q == 0 {
        bail!(Domain, "q must be >= 1");
    }
    let terms = table.lambda_terms(x)?;
    worst_from_buckets(&bucket_sums(&terms, q), x, q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvRow {
    pub q: u64,
    pub phi_q: u64,
    pub a_star: u64,
    #[serde(rename = "E")]
    pub e: f64,
    pub abs_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvReport {
    pub alpha: Alpha,
    pub x: u64,
    #[serde(rename = "R")]
    pub r: u64,
    pub rows: Vec<BvRow>,
    pub window_size: usize,
    #[serde(rename = "M_alpha")]
    pub m_alpha: f64,
    /// `M_α R / (x #𝒮_α(R))`.
    pub rho: f64,
    /// `max |E| φ(q) / x` over the rows.
    pub bt_max: f64,
}

impl BvReport {
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha": self.alpha.to_string(),
            "x": self.x,
            "R": self.r,
            "window_size": self.window_size,
            "M_alpha": self.m_alpha,
            "rho": self.rho,
            "bt_max": self.bt_max,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "phi_q", "a_star", "E", "abs_E"])?;
        for r in &self.rows {
            w.write_record([r.q.to_string(), r.phi_q.to_string(), r.a_star.to_string(), r.e.to_string(), r.abs_e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Brun–Titchmarsh sanity ceiling on `|E| φ(q) / x`.
pub const BT_CEILING: f64 = 2.0;

/// `M_α(x; R)` over `𝒮_α(R) = {⌊j^α⌋} ∩ [R, 2R]`, rows in ascending `q`.
pub fn bv_sum(table: &PrimeTable, alpha: Alpha, x: u64, r: u64) -> Result<BvReport> {
    if r == 0 || r > x {
        bail!(Domain, "need 1 <= R <= x, got R = {r}, x = {x}");
    }
    let moduli = window(alpha, r as u128)?.moduli();
    if moduli.is_empty() {
        bail!(Domain, "the window [R, 2R] with R = {r} has no members for alpha = {alpha}");
    }
    let terms = table.lambda_terms(x)?;
    let rows = moduli
        .par_iter()
        .map(|&q| {
            let q = q as u64;
            let (a_star, e) = worst_from_buckets(&bucket_sums(&terms, q), x, q)?;
            Ok(BvRow { q, phi_q: euler_phi(q as u128)? as u64, a_star, e, abs_e: e.abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let m_alpha = rows.iter().map(|row| FixedSum::term(row.abs_e)).sum::<FixedSum>().to_f64();
    let window_size = rows.len();
    let rho = m_alpha * r as f64 / (x as f64 * window_size as f64);
    let bt_max = rows.iter().map(|row| row.abs_e * row.phi_q as f64 / x as f64).fold(0.0, f64::max);
    Ok(BvReport { alpha, x, r, rows, window_size, m_alpha, rho, bt_max })
}

/// Largest divisor of `n` of the form `⌊j^α⌋`.
pub fn ps_largest_divisor(n: u64, alpha: &Alpha) -> Result<u64> {
    if n == 0 {
        bail!(Domain, "n must be >= 1");
    }
    for d in divisors(n as u128)?.into_iter().rev() {
        if is_ps_member(d, alpha)? {
            return Ok(d as u64);
        }
    }
    Ok(1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedPrimeSearch {
    /// `(p, PS_α(p − 1))`, ascending in `p`.
    pub hits: Vec<(u64, u64)>,
    /// `θ >= Φ(α)`, outside the range the corollary covers (false when `Φ(α)` is undefined).
    pub theta_exceeds_level: bool,
}

/// All primes `p <= x` with `PS_α(p − 1) >= p^θ`.
pub fn shifted_prime_search(table: &PrimeTable, alpha: &Alpha, theta: f64, x: u64) -> Result<ShiftedPrimeSearch> {
    if !theta.is_finite() {
        return Err(Error::Domain("theta must be finite".into()));
    }
    table.check(x)?;
    let primes: Vec<u64> = table.prime_powers_upto(x)?.into_iter().filter(|&(n, p)| n == p).map(|e| e.0).collect();
    let hits = primes
        .par_iter()
        .map(|&p| Ok((p, ps_largest_divisor(p - 1, alpha)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&(p, d)| d as f64 >= (p as f64).powf(theta))
        .collect();
    let theta_exceeds_level = phi_alpha(alpha.value()).is_ok_and(|phi| theta >= phi);
    Ok(ShiftedPrimeSearch { hits, theta_exceeds_level })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Alpha {
        s.parse().unwrap()
    }

    #[test]
    fn small_table() {
        let t = PrimeTable::build(10).unwrap();
        let primes: Vec<u64> = (0..=10).filter(|&n| t.is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7]);
        assert_eq!(t.lambda(8), 2f64.ln());
        assert_eq!(t.lambda(9), 3f64.ln());
        assert_eq!(t.lambda(6), 0.0);
        assert_eq!(t.lambda(1), 0.0);
        let one = PrimeTable::build(1).unwrap();
        assert_eq!(one.prime_count(1).unwrap(), 0);
        assert!(one.prime_powers_upto(1).unwrap().is_empty());
        assert!(matches!(PrimeTable::build_with_limit(100, 10), Err(Error::Capacity(_))));
    }

    #[test]
    fn sieve_matches_trial_division() {
        let t = PrimeTable::build(5000).unwrap();
        for n in 0..=5000u64 {
            let brute = n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(t.is_prime(n), brute, "n = {n}");
        }
        assert_eq!(t.prime_count(5000).unwrap(), 669);
        let pp = t.prime_powers_upto(5000).unwrap();
        assert!(pp.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn progression_examples() {
        let t = PrimeTable::build(100).unwrap();
        assert!((lambda_sum_progression(&t, 10, 4, 1).unwrap() - (5f64.ln() + 3f64.ln())).abs() < 1e-14);
        let psi10 = 3.0 * 2f64.ln() + 2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((lambda_sum_progression(&t, 10, 1, 1).unwrap() - psi10).abs() < 1e-14);
        assert_eq!(lambda_sum_progression(&t, 2, 5, 3).unwrap(), 0.0);
        assert!((error_term(&t, 10, 1, 1).unwrap() - (psi10 - 10.0)).abs() < 1e-13);
        assert!((error_term(&t, 10, 4, 1).unwrap() + 2.2919).abs() < 1e-4);
        // empty progression needs a > x as well as q > x
        assert_eq!(error_term(&t, 10, 13, 12).unwrap(), -10.0 / 12.0);
        assert!(error_term(&t, 10, 11, 3).unwrap() > -1.0);
        assert!(matches!(error_term(&t, 10, 4, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn worst_residue_examples() {
        let t = PrimeTable::build(100).unwrap();
        let (a1, e1) = worst_residue(&t, 10, 1).unwrap();
        assert_eq!(a1, 1);
        assert!((e1 - error_term(&t, 10, 1, 1).unwrap()).abs() < 1e-14);
        let (a2, e2) = worst_residue(&t, 10, 2).unwrap();
        assert_eq!(a2, 1);
        assert!((e2 - (2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln() - 10.0)).abs() < 1e-13);
        let (a4, e4) = worst_residue(&t, 10, 4).unwrap();
        assert_eq!(a4, 1);
        assert!((e4 + 2.2919).abs() < 1e-4);
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(ps_largest_divisor(12, &a("2")).unwrap(), 4);
        assert_eq!(ps_largest_divisor(1, &a("1.5")).unwrap(), 1);
        assert_eq!(ps_largest_divisor(11, &a("1.5")).unwrap(), 11);
    }

    #[test]
    fn shifted_primes() {
        let t = PrimeTable::build(100).unwrap();
        let s = shifted_prime_search(&t, &a("2"), 0.3, 100).unwrap();
        assert!(s.hits.iter().any(|&(p, d)| p == 37 && d == 36));
        assert!(!s.theta_exceeds_level);
        let all = shifted_prime_search(&t, &a("2"), 0.0, 100).unwrap();
        assert_eq!(all.hits.len(), 25);
        let strict = shifted_prime_search(&t, &a("2"), 0.99, 100).unwrap();
        assert!(strict.theta_exceeds_level);
        for &(p, d) in &strict.hits {
            assert!(d as f64 >= (p as f64).powf(0.99));
        }
        // exhaustive oracle: p − 1 must itself be a square here
        let oracle: Vec<u64> =
            (2..=100u64).filter(|&p| t.is_prime(p)).filter(|&p| { let r = crate::arith::isqrt((p - 1) as u128) as u64; r * r == p - 1 && ((p - 1) as f64) >= (p as f64).powf(0.99) }).collect();
        assert_eq!(strict.hits.iter().map(|h| h.0).collect::<Vec<_>>(), oracle);
    }

    #[test]
    fn bv_window_and_cache() {
        let t = PrimeTable::build(1000).unwrap();
        let rep = bv_sum(&t, a("2"), 1000, 10).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].q, 16);
        assert!(bv_sum(&t, a("2"), 1000, 2000).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = PrimeTable::cache_path(dir.path(), 1000);
        t.save(&path).unwrap();
        assert_eq!(PrimeTable::load(&path).unwrap(), t);
        std::fs::write(&path, b"garbage!").unwrap();
        assert!(PrimeTable::load(&path).is_err());
    }
}
