//! C ABI over the sparse-sieve workbench.
//!
//! Every fallible function returns an [`SsvStatus`]; on failure the message is
//! available from [`ssv_last_error`] on the same thread. Objects are handed out
//! as opaque pointers and must be released with the matching `_free` function.
//! Integers cross the boundary as 64-bit values; results that do not fit are
//! reported as `SSV_ERR_RANGE`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use sparse_sieve::bounds::{self, BoundId};
use sparse_sieve::bv::{self, BvReport, PrimeTable};
use sparse_sieve::moduli::{self, Alpha, IntPolynomial, ModuliSequence};
use sparse_sieve::sieve::{self, CoefficientVector};
use sparse_sieve::{energy, Error};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    ErrNull = 1,
    /// A string argument was not valid UTF-8.
    ErrUtf8 = 2,
    ErrDomain = 3,
    ErrPrecondition = 4,
    ErrValidation = 5,
    ErrRange = 6,
    ErrCapacity = 7,
    ErrPrecision = 8,
    ErrIo = 9,
    /// An index was out of bounds.
    ErrIndex = 10,
    /// A Rust panic was caught at the boundary.
    ErrPanic = 11,
}

/// A moduli sequence.
pub struct SsvSequence(ModuliSequence);

/// A table of primes and prime powers up to some `x_max`.
pub struct SsvPrimeTable(PrimeTable);

/// Error terms over a dyadic window of Piatetski-Shapiro moduli.
pub struct SsvBvReport(BvReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsvEnergy {
    pub n: u64,
    pub e_plus: u64,
    pub e_star: u64,
    /// Maximizing nonzero shift; meaningful only when `has_h_star` is 1.
    pub h_star: i64,
    pub has_h_star: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsvSieveResult {
    pub total: f64,
    pub norm_sq: f64,
    pub ratio: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsvSieveConstant {
    pub delta_star_lower: f64,
    pub certificate: f64,
    pub iterations: u64,
    pub points: u64,
    pub converged: u8,
    pub restarted: u8,
}

/// Crossover points; a NaN field means the crossing does not exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsvCrossovers {
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
    pub mu_capped: u8,
    pub window_nonempty: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsvBvRow {
    pub q: u64,
    pub phi_q: u64,
    pub a_star: u64,
    pub e: f64,
    pub abs_e: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsvBvSummary {
    pub x: u64,
    pub r: u64,
    pub window_size: u64,
    pub m_alpha: f64,
    pub rho: f64,
    pub bt_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SsvStatus {
    match e {
        Error::Domain(_) => SsvStatus::ErrDomain,
        Error::Precondition(_) => SsvStatus::ErrPrecondition,
        Error::Validation(_) | Error::Config(_) => SsvStatus::ErrValidation,
        Error::Range(_) => SsvStatus::ErrRange,
        Error::Capacity(_) => SsvStatus::ErrCapacity,
        Error::Precision(_) => SsvStatus::ErrPrecision,
        _ => SsvStatus::ErrIo,
    }
}

struct Fail(SsvStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: SsvStatus, msg: impl Into<String>) -> Result<T, Fail> {
    Err(Fail(status, msg.into()))
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SsvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SsvStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            SsvStatus::ErrPanic
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return fail(SsvStatus::ErrNull, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(SsvStatus::ErrUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(SsvStatus::ErrNull, format!("{name} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().map_or_else(|| fail(SsvStatus::ErrNull, format!("{name} is null")), Ok)
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().map_or_else(|| fail(SsvStatus::ErrNull, format!("{name} is null")), Ok)
}

fn to_u64(v: u128, what: &str) -> Result<u64, Fail> {
    u64::try_from(v).or_else(|_| fail(SsvStatus::ErrRange, format!("{what} = {v} does not fit in 64 bits")))
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ssv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ssv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn boxed_seq(seq: ModuliSequence, out_seq: *mut *mut SsvSequence) -> Result<(), Fail> {
    let slot = unsafe { out(out_seq, "out")? };
    *slot = Box::into_raw(Box::new(SsvSequence(seq)));
    Ok(())
}

/// First `q` values of `j^k`.
#[no_mangle]
pub extern "C" fn ssv_sequence_power(k: u32, q: u64, out_seq: *mut *mut SsvSequence) -> SsvStatus {
    guard(|| boxed_seq(moduli::generate_power(k, q)?, out_seq))
}

/// First `q` values of the integer polynomial with `coeffs[0..len]`, constant term first.
///
/// # Safety
/// `coeffs` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn ssv_sequence_polynomial(
    coeffs: *const i64,
    len: usize,
    q: u64,
    out_seq: *mut *mut SsvSequence,
) -> SsvStatus {
    guard(|| {
        let c = slice(coeffs, len, "coeffs")?;
        let f = IntPolynomial::new(c.iter().map(|&x| x as i128).collect());
        boxed_seq(moduli::generate_polynomial(&f, q)?, out_seq)
    })
}

/// `⌊j^α⌋` for `j = 1..jmax`; `alpha` is decimal or `p/q` text.
///
/// # Safety
/// `alpha` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ssv_sequence_ps(alpha: *const c_char, jmax: u64, out_seq: *mut *mut SsvSequence) -> SsvStatus {
    guard(|| {
        let a: Alpha = cstr(alpha, "alpha")?.parse()?;
        boxed_seq(moduli::generate_piatetski_shapiro(a, jmax)?, out_seq)
    })
}

/// A strictly increasing sequence of positive moduli given explicitly.
///
/// # Safety
/// `values` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn ssv_sequence_explicit(values: *const u64, len: usize, out_seq: *mut *mut SsvSequence) -> SsvStatus {
    guard(|| {
        let v = slice(values, len, "values")?;
        boxed_seq(ModuliSequence::explicit(v.iter().map(|&x| x as u128).collect(), None)?, out_seq)
    })
}

/// # Safety
/// `seq` must be null or a handle from an `ssv_sequence_*` constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ssv_sequence_free(seq: *mut SsvSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Number of terms; 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssv_sequence_len(seq: *const SsvSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.len())
}

/// Term `m_j` for `1 <= j <= len`.
///
/// # Safety
/// `seq` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_sequence_get(seq: *const SsvSequence, j: usize, value: *mut u64) -> SsvStatus {
    guard(|| {
        let s = handle(seq, "seq")?;
        if j == 0 || j > s.0.len() {
            return fail(SsvStatus::ErrIndex, format!("index {j} outside 1..={}", s.0.len()));
        }
        *out(value, "value")? = to_u64(s.0.get(j), "m_j")?;
        Ok(())
    })
}

/// Additive energy `E⁺` and `E⁺_⋆ = max_{h≠0} E⁺_h` of a set of integers.
///
/// # Safety
/// `values` must point to `len` readable values and `result` be writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_energy(values: *const i64, len: usize, result: *mut SsvEnergy) -> SsvStatus {
    guard(|| {
        let v: Vec<i128> = slice(values, len, "values")?.iter().map(|&x| x as i128).collect();
        let r = energy::energy_fast(&v, energy::Backend::Sparse)?;
        let h = r.h_star.map(i64::try_from).transpose().or_else(|_| fail(SsvStatus::ErrRange, "h_star does not fit in 64 bits"))?;
        *out(result, "result")? = SsvEnergy {
            n: r.n as u64,
            e_plus: to_u64(r.e_plus, "E+")?,
            e_star: to_u64(r.e_star, "E*")?,
            h_star: h.unwrap_or(0),
            has_h_star: u8::from(h.is_some()),
        };
        Ok(())
    })
}

/// `Σ_{j≤q} Σ_{a mod m_j, (a,m_j)=1} |Σ_n a_n e(an/m_j)|²` for coefficients on `n = offset+1..offset+len`.
///
/// # Safety
/// `re` and `im` must point to `len` readable values and `result` be writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_sieve_sum(
    seq: *const SsvSequence,
    q: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    offset: i64,
    result: *mut SsvSieveResult,
) -> SsvStatus {
    guard(|| {
        let s = handle(seq, "seq")?;
        let (re, im) = (slice(re, len, "re")?, slice(im, len, "im")?);
        let c = CoefficientVector::new(offset, re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())?;
        let r = sieve::sieve_sum_fast(&c, &s.0, q)?;
        *out(result, "result")? = SsvSieveResult { total: r.total, norm_sq: r.norm_sq, ratio: r.ratio };
        Ok(())
    })
}

/// Certified lower estimate of the optimal large sieve constant by power iteration.
///
/// # Safety
/// `seq` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_sieve_constant(
    seq: *const SsvSequence,
    q: usize,
    n: usize,
    offset: i64,
    tol: f64,
    max_iter: usize,
    seed: u64,
    result: *mut SsvSieveConstant,
) -> SsvStatus {
    guard(|| {
        let s = handle(seq, "seq")?;
        let e = sieve::estimate_sieve_constant(&s.0, q, n, offset, tol, max_iter, seed)?;
        *out(result, "result")? = SsvSieveConstant {
            delta_star_lower: e.delta_star_lower,
            certificate: e.certificate,
            iterations: e.iterations as u64,
            points: e.points as u64,
            converged: u8::from(e.converged),
            restarted: u8::from(e.restarted),
        };
        Ok(())
    })
}

/// Exponent of `Q` in the bound named `bound` for degree `k` at `N = Q^ν`.
///
/// # Safety
/// `bound` must be a NUL-terminated string and `exponent` writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_delta_exponent(bound: *const c_char, k: u32, nu: f64, exponent: *mut f64) -> SsvStatus {
    guard(|| {
        let id: BoundId = cstr(bound, "bound")?.parse()?;
        *out(exponent, "exponent")? = bounds::delta_exponent(id, k, nu)?;
        Ok(())
    })
}

/// Crossover points of the exponent bounds for degree `k`.
///
/// # Safety
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_crossovers(k: u32, result: *mut SsvCrossovers) -> SsvStatus {
    guard(|| {
        let r = bounds::crossover_report(k)?;
        *out(result, "result")? = SsvCrossovers {
            lambda: opt(r.lambda),
            mu: opt(r.mu),
            sigma: opt(r.sigma),
            tau: opt(r.tau),
            mu_capped: u8::from(r.mu_capped),
            window_nonempty: u8::from(r.window_nonempty() == Some(true)),
        };
        Ok(())
    })
}

/// Level function `Φ(α)`.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_phi_alpha(alpha: f64, value: *mut f64) -> SsvStatus {
    guard(|| {
        *out(value, "value")? = bounds::phi_alpha(alpha)?;
        Ok(())
    })
}

/// Sieves primes and prime powers up to `x`.
///
/// # Safety
/// `out_table` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_prime_table_build(x: u64, out_table: *mut *mut SsvPrimeTable) -> SsvStatus {
    guard(|| {
        let slot = out(out_table, "out")?;
        *slot = Box::into_raw(Box::new(SsvPrimeTable(PrimeTable::build(x)?)));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssv_prime_table_free(table: *mut SsvPrimeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// `π(x)` for `x` up to the table's limit.
///
/// # Safety
/// `table` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_prime_count(table: *const SsvPrimeTable, x: u64, count: *mut u64) -> SsvStatus {
    guard(|| {
        let t = handle(table, "table")?;
        *out(count, "count")? = t.0.prime_count(x)?;
        Ok(())
    })
}

/// Worst-residue error terms for every Piatetski-Shapiro modulus in `[r, 2r]`.
///
/// # Safety
/// `table` must be a live handle, `alpha` a NUL-terminated string and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_bv_sum(
    table: *const SsvPrimeTable,
    alpha: *const c_char,
    x: u64,
    r: u64,
    out_report: *mut *mut SsvBvReport,
) -> SsvStatus {
    guard(|| {
        let t = handle(table, "table")?;
        let a: Alpha = cstr(alpha, "alpha")?.parse()?;
        let slot = out(out_report, "out")?;
        *slot = Box::into_raw(Box::new(SsvBvReport(bv::bv_sum(&t.0, a, x, r)?)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssv_bv_report_free(report: *mut SsvBvReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of rows (moduli in the window); 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssv_bv_report_len(report: *const SsvBvReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.rows.len())
}

/// Row `i` for `0 <= i < len`.
///
/// # Safety
/// `report` must be a live handle and `row` writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_bv_report_row(report: *const SsvBvReport, i: usize, row: *mut SsvBvRow) -> SsvStatus {
    guard(|| {
        let r = handle(report, "report")?;
        let Some(src) = r.0.rows.get(i) else {
            return fail(SsvStatus::ErrIndex, format!("row {i} outside 0..{}", r.0.rows.len()));
        };
        *out(row, "row")? = SsvBvRow { q: src.q, phi_q: src.phi_q, a_star: src.a_star, e: src.e, abs_e: src.abs_e };
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `summary` writable.
#[no_mangle]
pub unsafe extern "C" fn ssv_bv_report_summary(report: *const SsvBvReport, summary: *mut SsvBvSummary) -> SsvStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        *out(summary, "summary")? = SsvBvSummary {
            x: r.x,
            r: r.r,
            window_size: r.window_size as u64,
            m_alpha: r.m_alpha,
            rho: r.rho,
            bt_max: r.bt_max,
        };
        Ok(())
    })
}
