//! C interface to `quadbound`.
//!
//! Objects cross the boundary as opaque heap handles that the caller frees
//! with the matching `*_free`. Every fallible call returns a [`QbStatus`];
//! the message of the most recent failure on the calling thread is available
//! through [`qb_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quadbound::bounds::{self, BoundValue};
use quadbound::ensemble::{recovery_experiment, RecoveryConfig};
use quadbound::estimators::{self, Method};
use quadbound::{Error, OracleInstance, OracleSpec, Polynomial, Region};

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    DimensionMismatch = 3,
    InvalidRegion = 4,
    InvalidParameter = 5,
    OutOfRegion = 6,
    BudgetExhausted = 7,
    IndivisibleBudget = 8,
    Parse = 9,
    Packing = 10,
    Io = 11,
    Panic = 99,
}

impl From<&Error> for QbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => QbStatus::DimensionMismatch,
            Error::InvalidRegion(_) => QbStatus::InvalidRegion,
            Error::InvalidParameter(_) | Error::BudgetTooSmall { .. } => QbStatus::InvalidParameter,
            Error::OutOfRegion { .. } => QbStatus::OutOfRegion,
            Error::BudgetExhausted { .. } => QbStatus::BudgetExhausted,
            Error::IndivisibleBudget { .. } => QbStatus::IndivisibleBudget,
            Error::Parse { .. } => QbStatus::Parse,
            Error::PackingConstruction { .. } => QbStatus::Packing,
            Error::Io(_) | Error::Csv(_) => QbStatus::Io,
        }
    }
}

/// Polynomial integrand.
pub struct QbPolynomial(Polynomial);

/// Axis-aligned integration region.
pub struct QbRegion(Region);

/// Stateful noisy oracle with its own RNG stream and query log.
pub struct QbOracle(OracleInstance);

/// Estimator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbMethod {
    Gq = 0,
    Sr = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QbEstimate {
    pub estimate: f64,
    pub exact: f64,
    pub abs_error: f64,
    pub total_queries: u64,
    pub per_node: u64,
    pub node_count: u64,
    /// Worst-case bound for the method (`gq_upper` or `sr_upper`).
    pub bound: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QbBound {
    pub value: f64,
    /// 0 when a precondition of the formula is violated.
    pub valid: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QbRecoverySummary {
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub fano_bound: f64,
    pub mean_abs_error: f64,
    pub psi_third: f64,
    pub packing_size: u64,
    pub packing_complete: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(QbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(QbStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QbStatus::NullPointer, format!("{what} is null"))
}

fn guard(op: impl FnOnce() -> Result<(), Failure>) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(op)) {
        Ok(Ok(())) => QbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_last_error(format!("internal panic: {msg}"));
            QbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(QbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn mut_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- polynomials ----

/// Parses the line format `coeff k1 ... kd`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_polynomial_parse(text: *const c_char, out: *mut *mut QbPolynomial) -> QbStatus {
    guard(|| {
        let p: Polynomial = str_arg(text, "text")?.parse()?;
        write_out(out, boxed(QbPolynomial(p)))
    })
}

/// Random polynomial of degree at most 3 in every variable.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_polynomial_random_cubic(d: usize, seed: u64, out: *mut *mut QbPolynomial) -> QbStatus {
    guard(|| write_out(out, boxed(QbPolynomial(Polynomial::random_cubic(d, seed)?))))
}

/// # Safety
/// `p` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_polynomial_free(p: *mut QbPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_polynomial_dim(p: *const QbPolynomial) -> usize {
    p.as_ref().map_or(0, |p| p.0.dim())
}

/// # Safety
/// `p` must be a live handle; `x` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_polynomial_evaluate(
    p: *const QbPolynomial,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QbStatus {
    guard(|| {
        let v = ref_arg(p, "polynomial")?.0.evaluate(slice_arg(x, len, "x")?)?;
        write_out(out, v)
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_polynomial_exact_integral(
    p: *const QbPolynomial,
    region: *const QbRegion,
    out: *mut f64,
) -> QbStatus {
    guard(|| {
        let v = ref_arg(p, "polynomial")?.0.exact_integral(&ref_arg(region, "region")?.0)?;
        write_out(out, v)
    })
}

/// Upper bound on the fourth partial derivatives over `region`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_polynomial_fourth_derivative_bound(
    p: *const QbPolynomial,
    region: *const QbRegion,
    out: *mut f64,
) -> QbStatus {
    guard(|| {
        let p = ref_arg(p, "polynomial")?;
        let region = ref_arg(region, "region")?;
        if region.0.dim() != p.0.dim() {
            return Err(Error::DimensionMismatch { expected: region.0.dim(), got: p.0.dim() }.into());
        }
        write_out(out, p.0.fourth_derivative_bound(&region.0).value())
    })
}

// ---- regions ----

/// `[-r, r]^d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_region_cube(d: usize, r: f64, out: *mut *mut QbRegion) -> QbStatus {
    guard(|| write_out(out, boxed(QbRegion(Region::cube(d, r)?))))
}

/// Rectangle from `d` lower and `d` upper limits.
///
/// # Safety
/// `lower` and `upper` must each point to `d` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_region_new(
    lower: *const f64,
    upper: *const f64,
    d: usize,
    out: *mut *mut QbRegion,
) -> QbStatus {
    guard(|| {
        let lo = slice_arg(lower, d, "lower")?;
        let hi = slice_arg(upper, d, "upper")?;
        let region = Region::new(lo.iter().copied().zip(hi.iter().copied()).collect())?;
        write_out(out, boxed(QbRegion(region)))
    })
}

/// # Safety
/// `region` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_region_free(region: *mut QbRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

// ---- oracles ----

/// Noise-free oracle when `sigma == 0`, Gaussian noise otherwise. A `budget`
/// of 0 means unlimited.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_oracle_new(sigma: f64, seed: u64, budget: u64, out: *mut *mut QbOracle) -> QbStatus {
    guard(|| {
        let spec = if sigma == 0.0 { OracleSpec::noise_free() } else { OracleSpec::gaussian(sigma, seed) };
        let mut oracle = OracleInstance::new(spec)?;
        if budget > 0 {
            oracle = oracle.with_budget(budget);
        }
        write_out(out, boxed(QbOracle(oracle)))
    })
}

/// # Safety
/// `oracle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_oracle_free(oracle: *mut QbOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// Number of queries answered so far.
///
/// # Safety
/// `oracle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_oracle_query_count(oracle: *const QbOracle) -> u64 {
    oracle.as_ref().map_or(0, |o| o.0.log().count())
}

/// # Safety
/// Handles must be live; `x` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_oracle_query(
    oracle: *mut QbOracle,
    p: *const QbPolynomial,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QbStatus {
    guard(|| {
        let oracle = mut_arg(oracle, "oracle")?;
        let v = oracle.0.query(&ref_arg(p, "polynomial")?.0, slice_arg(x, len, "x")?)?;
        write_out(out, v)
    })
}

// ---- estimators ----

/// Runs the chosen rule with `m` queries per node. Gauss quadrature requires
/// a cube centred at the origin.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_estimate(
    method: QbMethod,
    region: *const QbRegion,
    oracle: *mut QbOracle,
    p: *const QbPolynomial,
    m: u64,
    out: *mut QbEstimate,
) -> QbStatus {
    guard(|| {
        let method = match method {
            QbMethod::Gq => Method::Gq,
            QbMethod::Sr => Method::Sr,
        };
        let nodes = estimators::node_set(method, &ref_arg(region, "region")?.0)?;
        let report = estimators::estimate(&nodes, &mut mut_arg(oracle, "oracle")?.0, &ref_arg(p, "polynomial")?.0, m)?;
        let bound_name = match method {
            Method::Gq => "gq_upper",
            Method::Sr => "sr_upper",
        };
        write_out(
            out,
            QbEstimate {
                estimate: report.estimate,
                exact: report.exact.unwrap_or(f64::NAN),
                abs_error: report.abs_error.unwrap_or(f64::NAN),
                total_queries: report.budget.total,
                per_node: report.budget.per_node,
                node_count: report.budget.node_count,
                bound: report.bound_values.get(bound_name).map_or(f64::NAN, |b| b.value),
            },
        )
    })
}

// ---- bounds ----

fn to_c(b: BoundValue) -> QbBound {
    QbBound { value: b.value, valid: b.valid as i32 }
}

#[no_mangle]
pub extern "C" fn qb_bound_lower(d: usize, r: f64, t: f64) -> QbBound {
    to_c(bounds::lower_bound(d, r, t))
}

#[no_mangle]
pub extern "C" fn qb_bound_gq_upper(d: usize, r: f64, sigma: f64, t: f64, k: f64) -> QbBound {
    to_c(bounds::gq_upper_bound(d, r, sigma, t, k))
}

/// Pass a negative `c` to use the default Hermite constant `8 r^5 / 45`.
#[no_mangle]
pub extern "C" fn qb_bound_gq_gaussian(d: usize, r: f64, sigma: f64, t: f64, k: f64, c: f64) -> QbBound {
    to_c(bounds::gq_gaussian_error(d, r, sigma, t, k, (c >= 0.0).then_some(c)))
}

#[no_mangle]
pub extern "C" fn qb_bound_sr_upper(d: usize, b: f64, sigma: f64, t: f64, k: f64) -> QbBound {
    to_c(bounds::sr_upper_bound(d, b, sigma, t, k))
}

#[no_mangle]
pub extern "C" fn qb_bound_kl(t: f64, delta: f64) -> QbBound {
    to_c(bounds::kl_bound(t, delta))
}

#[no_mangle]
pub extern "C" fn qb_bound_fano(d: usize, t: f64, delta: f64) -> QbBound {
    to_c(bounds::fano_lower(d, t, delta))
}

#[no_mangle]
pub extern "C" fn qb_packing_cardinality_bound(d: usize) -> f64 {
    bounds::packing_cardinality_bound(d)
}

// ---- identification experiment ----

/// `workers == 0` uses the default thread count.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qb_recovery_experiment(
    d: usize,
    delta: f64,
    r: f64,
    sigma: f64,
    t: u64,
    trials: usize,
    seed: u64,
    workers: usize,
    out: *mut QbRecoverySummary,
) -> QbStatus {
    guard(|| {
        let mut cfg = RecoveryConfig::new(d, delta, r, sigma, t, trials, seed);
        cfg.workers = (workers > 0).then_some(workers);
        let s = recovery_experiment(&cfg)?;
        write_out(
            out,
            QbRecoverySummary {
                trials: s.trials as u64,
                failures: s.failures as u64,
                failure_rate: s.failure_rate,
                fano_bound: s.fano_bound,
                mean_abs_error: s.mean_abs_error,
                psi_third: s.psi_third,
                packing_size: s.packing_size as u64,
                packing_complete: s.packing_complete as i32,
            },
        )
    })
}
