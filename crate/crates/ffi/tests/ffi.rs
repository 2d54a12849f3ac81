use std::ffi::{CStr, CString};
use std::ptr;

use quadbound_ffi::*;

fn last_error() -> String {
    let p = qb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut QbPolynomial {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { qb_polynomial_parse(c.as_ptr(), &mut p) }, QbStatus::Ok);
    p
}

#[test]
fn integral_evaluate_and_bound() {
    let p = parse("1 2 1\n4 0 0\n");
    let mut cube = ptr::null_mut();
    unsafe {
        assert_eq!(qb_region_cube(2, 1.0, &mut cube), QbStatus::Ok);
        assert_eq!(qb_polynomial_dim(p), 2);
        let mut v = 0.0;
        assert_eq!(qb_polynomial_exact_integral(p, cube, &mut v), QbStatus::Ok);
        assert!((v - 16.0).abs() < 1e-12);
        let x = [2.0, 3.0];
        assert_eq!(qb_polynomial_evaluate(p, x.as_ptr(), 2, &mut v), QbStatus::Ok);
        assert_eq!(v, 16.0);
        assert_eq!(qb_polynomial_fourth_derivative_bound(p, cube, &mut v), QbStatus::Ok);
        assert_eq!(v, 0.0);
        qb_polynomial_free(p);
        qb_region_free(cube);
    }
}

#[test]
fn gauss_estimate_is_exact_without_noise() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(qb_polynomial_random_cubic(3, 11, &mut p), QbStatus::Ok);
        let mut cube = ptr::null_mut();
        qb_region_cube(3, 0.5, &mut cube);
        let mut oracle = ptr::null_mut();
        assert_eq!(qb_oracle_new(0.0, 0, 0, &mut oracle), QbStatus::Ok);
        let mut est = QbEstimate::default();
        assert_eq!(qb_estimate(QbMethod::Gq, cube, oracle, p, 2, &mut est), QbStatus::Ok);
        assert!((est.estimate - est.exact).abs() <= 1e-12 * est.exact.abs().max(1.0));
        assert_eq!(est.total_queries, 16);
        assert_eq!(qb_oracle_query_count(oracle), 16);
        qb_oracle_free(oracle);
        qb_region_free(cube);
        qb_polynomial_free(p);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut p = ptr::null_mut();
        let bad = CString::new("1 x 2").unwrap();
        assert_eq!(qb_polynomial_parse(bad.as_ptr(), &mut p), QbStatus::Parse);
        assert!(p.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(qb_polynomial_parse(ptr::null(), &mut p), QbStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut r = ptr::null_mut();
        assert_eq!(qb_region_cube(2, -1.0, &mut r), QbStatus::InvalidRegion);

        let q = parse("1 1 1");
        let mut oracle = ptr::null_mut();
        qb_oracle_new(1.0, 3, 1, &mut oracle);
        let x = [0.1, 0.2];
        let mut v = 0.0;
        assert_eq!(qb_oracle_query(oracle, q, x.as_ptr(), 2, &mut v), QbStatus::Ok);
        assert_eq!(qb_oracle_query(oracle, q, x.as_ptr(), 2, &mut v), QbStatus::BudgetExhausted);
        assert_eq!(qb_oracle_query(oracle, q, x.as_ptr(), 1, &mut v), QbStatus::DimensionMismatch);

        let mut rect = ptr::null_mut();
        let (lo, hi) = ([0.0, 0.0], [1.0, 2.0]);
        assert_eq!(qb_region_new(lo.as_ptr(), hi.as_ptr(), 2, &mut rect), QbStatus::Ok);
        let mut est = QbEstimate::default();
        assert_eq!(qb_estimate(QbMethod::Gq, rect, oracle, q, 1, &mut est), QbStatus::InvalidRegion);

        qb_oracle_free(oracle);
        qb_region_free(rect);
        qb_polynomial_free(q);
        qb_polynomial_free(ptr::null_mut());
    }
}

#[test]
fn bounds_match_core() {
    let b = qb_bound_gq_upper(1, 1.0, 1.0, 4.0, 0.0);
    assert_eq!((b.value, b.valid), (2.0, 1));
    assert_eq!(qb_bound_lower(10, 1.0, 100.0).valid, 0);
    assert_eq!(qb_bound_kl(1.0, 0.25).value, 1.0);
    let g = qb_bound_gq_gaussian(2, 1.0, 1.0, 16.0, 0.0, -1.0);
    assert_eq!(g.value, quadbound::bounds::gq_gaussian_error(2, 1.0, 1.0, 16.0, 0.0, None).value);
    assert_eq!(
        qb_bound_sr_upper(1, 1.0, 1.0, 3.0, 0.0).value,
        quadbound::bounds::sr_upper_bound(1, 1.0, 1.0, 3.0, 0.0).value
    );
    assert_eq!(qb_packing_cardinality_bound(4), quadbound::bounds::packing_cardinality_bound(4));
    assert!(qb_bound_fano(24, 1.0, 0.01).value > 0.0);
}

#[test]
fn recovery_summary_is_deterministic() {
    let run = |workers| {
        let mut s = QbRecoverySummary::default();
        assert_eq!(unsafe { qb_recovery_experiment(4, 0.1, 0.5, 1.0, 64, 40, 9, workers, &mut s) }, QbStatus::Ok);
        s
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.trials, 40);
    assert_eq!((a.failures, a.mean_abs_error), (b.failures, b.mean_abs_error));
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/quadbound.h");
    for name in [
        "qb_last_error_message",
        "qb_polynomial_parse",
        "qb_polynomial_free",
        "qb_region_cube",
        "qb_oracle_new",
        "qb_oracle_query",
        "qb_estimate",
        "qb_bound_gq_gaussian",
        "qb_recovery_experiment",
        "QB_STATUS_BUDGET_EXHAUSTED",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/quadbound.h");
    match std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header])
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; skipping"),
    }
}
