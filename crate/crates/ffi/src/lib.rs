//! C interface to `pmi-core`.
//!
//! Ensembles and Clifford encodings live behind opaque handles created from
//! JSON text and released with the matching `*_free`. Every fallible call
//! returns a [`PmiStatus`]; on failure [`pmi_last_error_message`] describes
//! what went wrong on the calling thread. Strings returned through `char **`
//! belong to the caller and must be released with [`pmi_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pmi_core::bounds::{best_upper_bound, lower_bound, DEFAULT_ALPHAS};
use pmi_core::clifford::CliffordEncoding;
use pmi_core::{delta, solve_pmi, solve_standard, Ensemble, Error, SolverOptions};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Numerical = 5,
    Panic = 6,
}

/// Which program to solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmiMode {
    /// Encoding revealed after the measurement.
    Pmi = 0,
    /// Encoding never revealed.
    Standard = 1,
}

/// Opaque ensemble handle.
pub struct PmiEnsemble(Ensemble);

/// Opaque Clifford encoding handle.
pub struct PmiClifford(CliffordEncoding);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).unwrap_or_default()));
}

fn status_of(err: &Error) -> PmiStatus {
    match err {
        Error::Parse(_) => PmiStatus::Parse,
        e if e.is_numerical() => PmiStatus::Numerical,
        _ => PmiStatus::Validation,
    }
}

struct Fail(PmiStatus);

impl From<Error> for Fail {
    fn from(err: Error) -> Self {
        set_error(err.to_string());
        Fail(status_of(&err))
    }
}

fn null(what: &str) -> Fail {
    set_error(format!("{what} is null"));
    Fail(PmiStatus::NullPointer)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PmiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PmiStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("internal panic");
            PmiStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        Fail(PmiStatus::InvalidUtf8)
    })
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T) {
    if !out.is_null() {
        *out = value;
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn options(tol: f64) -> SolverOptions {
    if tol > 0.0 {
        SolverOptions::with_tol(tol)
    } else {
        SolverOptions::default()
    }
}

/// Message for the most recent failure on this thread, or NULL. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn pmi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn pmi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pmi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates an ensemble from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pmi_ensemble_from_json(json: *const c_char, out: *mut *mut PmiEnsemble) -> PmiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let e = Ensemble::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(PmiEnsemble(e)));
        Ok(())
    })
}

/// # Safety
/// `e` must come from [`pmi_ensemble_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pmi_ensemble_free(e: *mut PmiEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Dimension, number of strings and number of encodings. Any output may be NULL.
///
/// # Safety
/// `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pmi_ensemble_shape(
    e: *const PmiEnsemble,
    dim: *mut usize,
    strings: *mut usize,
    encodings: *mut usize,
) -> PmiStatus {
    guard(|| {
        let e = &deref(e, "ensemble")?.0;
        put(dim, e.dim());
        put(strings, e.strings());
        put(encodings, e.encodings());
        Ok(())
    })
}

/// Solves the chosen program. `tol <= 0` selects the default tolerance.
/// If `solution_json` is not NULL it receives the full solution (value,
/// certificate, measurement) as JSON.
///
/// # Safety
/// `e` must be a live handle; outputs must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn pmi_solve(
    e: *const PmiEnsemble,
    mode: PmiMode,
    tol: f64,
    value: *mut f64,
    solution_json: *mut *mut c_char,
) -> PmiStatus {
    guard(|| {
        put(solution_json, ptr::null_mut());
        let e = &deref(e, "ensemble")?.0;
        let opts = options(tol);
        let sol = match mode {
            PmiMode::Pmi => solve_pmi(e, &opts)?,
            PmiMode::Standard => solve_standard(e, &opts)?,
        };
        put(value, sol.primal_value);
        if !solution_json.is_null() {
            let s = serde_json::to_string(&sol.to_file()).map_err(Error::from)?;
            *solution_json = to_c_string(s);
        }
        Ok(())
    })
}

/// Gain from the announced encoding, with the summed duality gaps.
///
/// # Safety
/// `e` must be a live handle; outputs must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn pmi_delta(e: *const PmiEnsemble, tol: f64, value: *mut f64, uncertainty: *mut f64) -> PmiStatus {
    guard(|| {
        let d = delta(&deref(e, "ensemble")?.0, &options(tol))?;
        put(value, d.value);
        put(uncertainty, d.uncertainty);
        Ok(())
    })
}

/// Partition lower bound and the best power upper bound over the default
/// exponents. Needs a product-uniform prior.
///
/// # Safety
/// `e` must be a live handle; outputs must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn pmi_bounds(e: *const PmiEnsemble, tol: f64, lower: *mut f64, upper: *mut f64) -> PmiStatus {
    guard(|| {
        let e = &deref(e, "ensemble")?.0;
        let opts = options(tol);
        let (lo, _) = lower_bound(e, &opts)?;
        let (hi, _) = best_upper_bound(e, &DEFAULT_ALPHAS, opts.max_vectors)?;
        put(lower, lo);
        put(upper, hi);
        Ok(())
    })
}

/// Parses a Clifford encoding from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pmi_clifford_from_json(json: *const c_char, out: *mut *mut PmiClifford) -> PmiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let c = CliffordEncoding::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(PmiClifford(c)));
        Ok(())
    })
}

/// # Safety
/// `c` must come from [`pmi_clifford_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pmi_clifford_free(c: *mut PmiClifford) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Closed-form analysis. `useless` is set to 1 when the announced encoding
/// cannot help. The full per-partition table goes to `analysis_json` if not NULL.
///
/// # Safety
/// `c` must be a live handle; outputs must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn pmi_clifford_analyze(
    c: *const PmiClifford,
    p_pmi: *mut f64,
    useless: *mut i32,
    analysis_json: *mut *mut c_char,
) -> PmiStatus {
    guard(|| {
        put(analysis_json, ptr::null_mut());
        let a = deref(c, "encoding")?.0.analyze()?;
        put(p_pmi, a.p_pmi);
        put(useless, i32::from(a.useless));
        if !analysis_json.is_null() {
            let s = serde_json::to_string(&a).map_err(Error::from)?;
            *analysis_json = to_c_string(s);
        }
        Ok(())
    })
}

/// Ensemble of the encoding, for use with the solver calls.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pmi_clifford_to_ensemble(c: *const PmiClifford, out: *mut *mut PmiEnsemble) -> PmiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let e = deref(c, "encoding")?.0.to_ensemble()?;
        *out = Box::into_raw(Box::new(PmiEnsemble(e)));
        Ok(())
    })
}
