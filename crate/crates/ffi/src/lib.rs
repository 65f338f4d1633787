//! C interface to `corrdyn`.
//!
//! Conventions:
//! - every function returns a [`CdStatus`]; on failure a message is
//!   available from [`cd_last_error`] on the same thread;
//! - objects are opaque handles released with their `_free` function;
//! - strings returned through `char **` are owned by the caller and must be
//!   released with [`cd_string_free`];
//! - complex numbers cross the boundary as `(re, im)` pairs of doubles.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use corrdyn::algebra::SpherePoint;
use corrdyn::correspondence::{build_family, certify, Correspondence, FamilySpec};
use corrdyn::diffop::DiffOperator;
use corrdyn::error::Error;
use corrdyn::invset::min_invariant_set;
use corrdyn::io::to_canonical_json;
use corrdyn::measure::{exact_pushforward, sample_orbit_measure};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInput = 4,
    NotCertified = 5,
    NoEscape = 6,
    BudgetExceeded = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Opaque handle to a correspondence.
pub struct CdCorrespondence {
    inner: Correspondence,
}

/// Opaque handle to a differential operator.
pub struct CdOperator {
    inner: DiffOperator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs removed"));
}

fn status_of(err: &Error) -> CdStatus {
    match err {
        Error::Parse { .. } | Error::Json(_) => CdStatus::ParseError,
        Error::InvalidInput(_) | Error::OrderTooLarge { .. } | Error::DegreeTooHigh { .. } | Error::Io(_) => {
            CdStatus::InvalidInput
        }
        Error::NotCertified(_) => CdStatus::NotCertified,
        Error::NoEscape { .. } => CdStatus::NoEscape,
        Error::BudgetExceeded { .. } => CdStatus::BudgetExceeded,
        _ => CdStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), CdStatus>) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CdStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CdStatus::Panic
        }
    }
}

fn fail(err: Error) -> CdStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null(name: &str) -> CdStatus {
    set_error(format!("{name} is NULL"));
    CdStatus::NullPointer
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, CdStatus> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        CdStatus::InvalidUtf8
    })
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, CdStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T, name: &str) -> Result<(), CdStatus> {
    if out.is_null() {
        return Err(null(name));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_json(out: *mut *mut c_char, text: String) -> Result<(), CdStatus> {
    if out.is_null() {
        return Err(null("out_json"));
    }
    let c = CString::new(text).map_err(|_| {
        set_error("output contains NUL");
        CdStatus::Numerical
    })?;
    *out = c.into_raw();
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CdStatus> {
    to_canonical_json(value).map_err(|e| fail(e.into()))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn cd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a curve literal such as `"w^2 - z"`.
#[no_mangle]
pub unsafe extern "C" fn cd_correspondence_parse(curve: *const c_char, out: *mut *mut CdCorrespondence) -> CdStatus {
    guard(|| {
        let src = read_str(curve, "curve")?;
        let inner = Correspondence::parse(src).map_err(fail)?;
        write_out(out, CdCorrespondence { inner }, "out")
    })
}

/// Builds the correspondence of a family given as
/// `{"R0": "...", "P": [...], "beta": [[re, im], ...]}`.
#[no_mangle]
pub unsafe extern "C" fn cd_correspondence_from_family_json(
    json: *const c_char,
    out: *mut *mut CdCorrespondence,
) -> CdStatus {
    guard(|| {
        let spec = FamilySpec::from_json(read_str(json, "json")?).map_err(fail)?;
        let inner = build_family(&spec).map_err(fail)?;
        write_out(out, CdCorrespondence { inner }, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cd_correspondence_free(handle: *mut CdCorrespondence) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Fiber `F(z)`. Finite roots, repeated by multiplicity and sorted by
/// `(re, im)`, go to `out_re_im` as `2 * out_len` doubles; `capacity` counts
/// roots. Returns `BUFFER_TOO_SMALL` with `out_len` set to the number needed
/// when the buffer is short. `out_infinite` receives the multiplicity of
/// infinity.
#[no_mangle]
pub unsafe extern "C" fn cd_fiber(
    handle: *const CdCorrespondence,
    re: f64,
    im: f64,
    out_re_im: *mut f64,
    capacity: usize,
    out_len: *mut usize,
    out_infinite: *mut usize,
) -> CdStatus {
    guard(|| {
        let corr = &deref(handle, "handle")?.inner;
        if out_len.is_null() || out_infinite.is_null() {
            return Err(null("out_len/out_infinite"));
        }
        let fiber = corr.fiber(Complex64::new(re, im)).map_err(fail)?;
        let finite = fiber.finite_expanded();
        *out_len = finite.len();
        *out_infinite = fiber
            .roots
            .iter()
            .filter(|r| r.value == SpherePoint::Infinity)
            .map(|r| r.multiplicity)
            .sum();
        if finite.len() > capacity {
            set_error(format!("buffer holds {capacity} roots, {} needed", finite.len()));
            return Err(CdStatus::BufferTooSmall);
        }
        if !finite.is_empty() && out_re_im.is_null() {
            return Err(null("out_re_im"));
        }
        for (k, w) in finite.iter().enumerate() {
            *out_re_im.add(2 * k) = w.re;
            *out_re_im.add(2 * k + 1) = w.im;
        }
        Ok(())
    })
}

/// Parses an operator literal such as `"(w^2-1)*D^2 + D"` or its JSON form.
#[no_mangle]
pub unsafe extern "C" fn cd_operator_parse(src: *const c_char, out: *mut *mut CdOperator) -> CdStatus {
    guard(|| {
        let text = read_str(src, "src")?;
        let inner = if text.trim_start().starts_with('{') {
            DiffOperator::from_json(text)
        } else {
            DiffOperator::parse(text)
        }
        .map_err(fail)?;
        write_out(out, CdOperator { inner }, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cd_operator_free(handle: *mut CdOperator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// The degree-`n` correspondence `T_n` of an operator.
#[no_mangle]
pub unsafe extern "C" fn cd_operator_build_tn(
    op: *const CdOperator,
    n: u64,
    out: *mut *mut CdCorrespondence,
) -> CdStatus {
    guard(|| {
        let op = &deref(op, "op")?.inner;
        let tn = op.build_tn(n).map_err(fail)?;
        write_out(out, CdCorrespondence { inner: tn.correspondence }, "out")
    })
}

/// Certificate of `T_n` as JSON. A failing certificate is still `OK`; read
/// its `pass` field.
#[no_mangle]
pub unsafe extern "C" fn cd_certify_operator_json(
    op: *const CdOperator,
    n: u64,
    samples_per_disk: usize,
    out_json: *mut *mut c_char,
) -> CdStatus {
    guard(|| {
        let op = &deref(op, "op")?.inner;
        let family = op.build_tn(n).map_err(fail)?.family.ok_or_else(|| {
            set_error("T_n has no perturbative family");
            CdStatus::InvalidInput
        })?;
        let cert = certify(&family, samples_per_disk).map_err(fail)?;
        write_json(out_json, to_json(&cert)?)
    })
}

/// Normalized depth-`m` pushforward of the Dirac mass at `(re, im)`.
#[no_mangle]
pub unsafe extern "C" fn cd_exact_pushforward_json(
    handle: *const CdCorrespondence,
    re: f64,
    im: f64,
    m: usize,
    prune_tol: f64,
    budget: usize,
    out_json: *mut *mut c_char,
) -> CdStatus {
    guard(|| {
        let corr = &deref(handle, "handle")?.inner;
        let mu = exact_pushforward(corr, Complex64::new(re, im), m, prune_tol, budget).map_err(fail)?;
        write_json(out_json, to_json(&mu)?)
    })
}

/// Monte-Carlo estimate of the equidistribution measure.
#[no_mangle]
pub unsafe extern "C" fn cd_sample_orbit_json(
    handle: *const CdCorrespondence,
    re: f64,
    im: f64,
    burn_in: usize,
    samples: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> CdStatus {
    guard(|| {
        let corr = &deref(handle, "handle")?.inner;
        let mu = sample_orbit_measure(corr, Complex64::new(re, im), burn_in, samples, seed).map_err(fail)?;
        write_json(out_json, to_json(&mu)?)
    })
}

/// Minimal invariant set of `T_n` at resolution `eps` as JSON.
#[no_mangle]
pub unsafe extern "C" fn cd_min_invariant_set_json(
    op: *const CdOperator,
    n: u64,
    eps: f64,
    max_atoms: usize,
    out_json: *mut *mut c_char,
) -> CdStatus {
    guard(|| {
        let op = &deref(op, "op")?.inner;
        if !(eps > 0.0) {
            set_error("eps must be positive");
            return Err(CdStatus::InvalidInput);
        }
        let set = min_invariant_set(op, n, eps, max_atoms).map_err(fail)?;
        write_json(out_json, to_json(&set)?)
    })
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
