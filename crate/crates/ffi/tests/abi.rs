use std::ffi::{CStr, CString};
use std::ptr;

use sparse_sieve_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ssv_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn power_sequence_roundtrip() {
    let mut seq = ptr::null_mut();
    assert_eq!(ssv_sequence_power(3, 10, &mut seq), SsvStatus::Ok);
    unsafe {
        assert_eq!(ssv_sequence_len(seq), 10);
        let mut v = 0u64;
        assert_eq!(ssv_sequence_get(seq, 4, &mut v), SsvStatus::Ok);
        assert_eq!(v, 64);
        assert_eq!(ssv_sequence_get(seq, 0, &mut v), SsvStatus::ErrIndex);
        assert!(last_error().contains("index 0"));
        assert_eq!(ssv_sequence_get(seq, 11, &mut v), SsvStatus::ErrIndex);
        ssv_sequence_free(seq);
    }
}

#[test]
fn ps_and_polynomial_sequences() {
    let alpha = CString::new("3/2").unwrap();
    let mut seq = ptr::null_mut();
    unsafe {
        assert_eq!(ssv_sequence_ps(alpha.as_ptr(), 5, &mut seq), SsvStatus::Ok);
        let got: Vec<u64> = (1..=5)
            .map(|j| {
                let mut v = 0;
                assert_eq!(ssv_sequence_get(seq, j, &mut v), SsvStatus::Ok);
                v
            })
            .collect();
        assert_eq!(got, vec![1, 2, 5, 8, 11]);
        ssv_sequence_free(seq);

        let coeffs = [1i64, 1, 1];
        assert_eq!(ssv_sequence_polynomial(coeffs.as_ptr(), 3, 4, &mut seq), SsvStatus::Ok);
        let mut v = 0;
        assert_eq!(ssv_sequence_get(seq, 4, &mut v), SsvStatus::Ok);
        assert_eq!(v, 21);
        ssv_sequence_free(seq);
    }
}

#[test]
fn bad_inputs_report_codes() {
    let mut seq = ptr::null_mut();
    assert_eq!(ssv_sequence_power(0, 10, &mut seq), SsvStatus::ErrDomain);
    assert!(seq.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(ssv_sequence_power(2, 10, ptr::null_mut()), SsvStatus::ErrNull);
    let bad = [0xffu8, 0];
    unsafe {
        assert_eq!(ssv_sequence_ps(bad.as_ptr().cast(), 5, &mut seq), SsvStatus::ErrUtf8);
        let values = [3u64, 2];
        assert_eq!(ssv_sequence_explicit(values.as_ptr(), 2, &mut seq), SsvStatus::ErrValidation);
        // null handles are harmless to free and have length 0
        ssv_sequence_free(ptr::null_mut());
        assert_eq!(ssv_sequence_len(ptr::null()), 0);
    }
    assert_eq!(ssv_sequence_power(2, 3, &mut seq), SsvStatus::Ok);
    assert!(last_error().is_empty());
    unsafe { ssv_sequence_free(seq) };
}

#[test]
fn energy_of_squares() {
    let s = [1i64, 4, 9, 16];
    let mut e = SsvEnergy::default();
    assert_eq!(unsafe { ssv_energy(s.as_ptr(), 4, &mut e) }, SsvStatus::Ok);
    assert_eq!(e.n, 4);
    assert_eq!(e.e_plus, 28);
    assert_eq!(e.has_h_star, 1);
}

#[test]
fn sieve_sum_and_constant() {
    let mut seq = ptr::null_mut();
    assert_eq!(ssv_sequence_power(2, 4, &mut seq), SsvStatus::Ok);
    let re = [1.0; 16];
    let im = [0.0; 16];
    let mut r = SsvSieveResult::default();
    let mut c = SsvSieveConstant::default();
    unsafe {
        assert_eq!(ssv_sieve_sum(seq, 4, re.as_ptr(), im.as_ptr(), 16, 0, &mut r), SsvStatus::Ok);
        assert!((r.norm_sq - 16.0).abs() < 1e-12);
        assert!(r.total >= r.norm_sq - 1e-9);
        assert_eq!(ssv_sieve_constant(seq, 4, 16, 0, 1e-9, 500, 1, &mut c), SsvStatus::Ok);
        assert!(c.delta_star_lower >= c.certificate * (1.0 - 1e-6));
        assert_eq!(ssv_sieve_sum(seq, 5, re.as_ptr(), im.as_ptr(), 16, 0, &mut r), SsvStatus::ErrDomain);
        ssv_sequence_free(seq);
    }
}

#[test]
fn bounds_entry_points() {
    let name = CString::new("trivial").unwrap();
    let mut x = 0.0;
    unsafe {
        assert_eq!(ssv_delta_exponent(name.as_ptr(), 2, 3.0, &mut x), SsvStatus::Ok);
        assert!(x.is_finite());
        let unknown = CString::new("nope").unwrap();
        assert_eq!(ssv_delta_exponent(unknown.as_ptr(), 2, 3.0, &mut x), SsvStatus::ErrDomain);
        let mut c = SsvCrossovers::default();
        assert_eq!(ssv_crossovers(7, &mut c), SsvStatus::Ok);
        assert!((c.tau - c.lambda).abs() < 1e-12);
        assert_eq!(c.window_nonempty, 1);
        assert_eq!(ssv_phi_alpha(1.2, &mut x), SsvStatus::Ok);
        assert!(x > 0.0);
    }
}

#[test]
fn prime_table_and_bv_report() {
    let mut t = ptr::null_mut();
    let mut rep = ptr::null_mut();
    let alpha = CString::new("1.2").unwrap();
    unsafe {
        assert_eq!(ssv_prime_table_build(10_000, &mut t), SsvStatus::Ok);
        let mut pi = 0;
        assert_eq!(ssv_prime_count(t, 100, &mut pi), SsvStatus::Ok);
        assert_eq!(pi, 25);
        assert_eq!(ssv_prime_count(t, 10_001, &mut pi), SsvStatus::ErrRange);
        assert_eq!(ssv_bv_sum(t, alpha.as_ptr(), 10_000, 40, &mut rep), SsvStatus::Ok);
        let n = ssv_bv_report_len(rep);
        assert!(n > 0);
        let mut s = SsvBvSummary::default();
        assert_eq!(ssv_bv_report_summary(rep, &mut s), SsvStatus::Ok);
        assert_eq!(s.window_size as usize, n);
        let mut row = SsvBvRow::default();
        assert_eq!(ssv_bv_report_row(rep, 0, &mut row), SsvStatus::Ok);
        assert!(row.q >= 40 && row.q <= 80);
        assert!((row.e.abs() - row.abs_e).abs() < 1e-12);
        assert_eq!(ssv_bv_report_row(rep, n, &mut row), SsvStatus::ErrIndex);
        ssv_bv_report_free(rep);
        ssv_prime_table_free(t);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(ssv_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
