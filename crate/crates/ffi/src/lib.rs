//! C ABI for `projlink`.
//!
//! Objects cross the boundary as opaque handles created by the `*_from_json`
//! and `*_new` constructors and released with the matching `*_free`. Every
//! fallible call returns a [`PlStatus`]; on failure the message is available
//! from [`pl_last_error_message`] on the same thread until the next call.
//! Results are written through out-pointers, which are left untouched on
//! failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use projlink::criterion::{estimate_minimal_mass, CriterionOptions};
use projlink::curves::{cone_chain, HoloChain, ParamCurve};
use projlink::fs::{HomogeneousSection, ProjPoint, C64};
use projlink::invariants::{
    affine_linking, chain_mass, projective_linking, winding_number, Divisor, IntersectionOptions, QuadratureOptions,
};
use projlink::io;
use projlink::qpsh::{best_constant, HullOptions};
use projlink::Error;

/// Closed curve in CP^n.
pub struct PlCurve(ParamCurve);

/// Homogeneous polynomial section of O(d).
pub struct PlSection(HomogeneousSection);

/// Positive holomorphic 1-chain.
pub struct PlChain(HoloChain);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or inconsistent input: schema, dimension or value errors.
    InvalidInput = 3,
    /// The numerics could not certify a result, e.g. a divisor meets the curve.
    Numerical = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PlStatus, message: impl Into<String>) -> PlStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> PlStatus {
    let status = if e.is_numerical() {
        PlStatus::Numerical
    } else {
        PlStatus::InvalidInput
    };
    fail(status, format!("[{}] {e}", e.kind()))
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PlStatus>) -> PlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PlStatus::Panic, msg)
        }
    }
}

fn lift<T>(r: projlink::Result<T>) -> Result<T, PlStatus> {
    r.map_err(from_error)
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, PlStatus> {
    if s.is_null() {
        return Err(fail(PlStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(PlStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, PlStatus> {
    p.as_ref()
        .ok_or_else(|| fail(PlStatus::NullPointer, format!("null {what}")))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), PlStatus> {
    if out.is_null() {
        return Err(fail(PlStatus::NullPointer, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn complex_slice(re: *const f64, im: *const f64, len: usize) -> Result<Vec<C64>, PlStatus> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() || im.is_null() {
        return Err(fail(PlStatus::NullPointer, "null coefficient array"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = std::slice::from_raw_parts(im, len);
    Ok(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next `pl_*` call on the same thread.
#[no_mangle]
pub extern "C" fn pl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_curve_from_json(json: *const c_char, out: *mut *mut PlCurve) -> PlStatus {
    guard(|| {
        let curve = lift(io::parse_curve(text(json)?))?;
        write(out, Box::into_raw(Box::new(PlCurve(curve))))
    })
}

/// # Safety
/// `curve` must come from `pl_curve_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_curve_free(curve: *mut PlCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_section_from_json(json: *const c_char, out: *mut *mut PlSection) -> PlStatus {
    guard(|| {
        let s = lift(io::parse_section(text(json)?))?;
        write(out, Box::into_raw(Box::new(PlSection(s))))
    })
}

/// Section from coefficient arrays in monomial order (lexicographic, the
/// exponent of `z0` descending first).
///
/// # Safety
/// `re` and `im` must hold `len` doubles each and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_section_new(
    dimension: usize,
    degree: u32,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut PlSection,
) -> PlStatus {
    guard(|| {
        let coeffs = complex_slice(re, im, len)?;
        let s = lift(HomogeneousSection::new(dimension, degree, coeffs))?;
        write(out, Box::into_raw(Box::new(PlSection(s))))
    })
}

/// # Safety
/// `section` must come from a section constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_section_free(section: *mut PlSection) {
    if !section.is_null() {
        drop(Box::from_raw(section));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_chain_from_json(json: *const c_char, out: *mut *mut PlChain) -> PlStatus {
    guard(|| {
        let chain = lift(io::parse_chain(text(json)?))?;
        write(out, Box::into_raw(Box::new(PlChain(chain))))
    })
}

/// # Safety
/// `chain` must come from `pl_chain_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_chain_free(chain: *mut PlChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Projective winding number with default quadrature settings. `error` may
/// be NULL.
///
/// # Safety
/// Handles must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_winding_number(
    curve: *const PlCurve,
    section: *const PlSection,
    value: *mut f64,
    error: *mut f64,
) -> PlStatus {
    guard(|| {
        let r = lift(winding_number(
            &handle(curve, "curve")?.0,
            &handle(section, "section")?.0,
            &QuadratureOptions::default(),
        ))?;
        write(value, r.value)?;
        if !error.is_null() {
            error.write(r.error);
        }
        Ok(())
    })
}

/// Projective linking number through `chain`, or through a cone with a
/// random apex drawn from `seed` when `chain` is NULL.
///
/// # Safety
/// Handles must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_projective_linking(
    curve: *const PlCurve,
    section: *const PlSection,
    chain: *const PlChain,
    seed: u64,
    value: *mut f64,
) -> PlStatus {
    guard(|| {
        let curve = &handle(curve, "curve")?.0;
        let divisor = Divisor::new(handle(section, "section")?.0.clone());
        let n = match chain.as_ref() {
            Some(c) => lift(c.0.to_param_chain(curve))?,
            None => lift(cone_chain(curve, None, seed))?,
        };
        let r = lift(projective_linking(
            curve,
            &divisor,
            &n,
            &QuadratureOptions::default(),
            &IntersectionOptions::default(),
        ))?;
        write(value, r.value)
    })
}

/// # Safety
/// Handles must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_affine_linking(
    curve: *const PlCurve,
    section: *const PlSection,
    value: *mut i64,
) -> PlStatus {
    guard(|| {
        let v = lift(affine_linking(
            &handle(curve, "curve")?.0,
            &handle(section, "section")?.0,
            &QuadratureOptions::default(),
        ))?;
        write(value, v)
    })
}

/// # Safety
/// `chain` must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_chain_mass(chain: *const PlChain, value: *mut f64) -> PlStatus {
    guard(|| {
        let r = lift(chain_mass(&handle(chain, "chain")?.0, &QuadratureOptions::default()))?;
        write(value, r.value)
    })
}

/// Minimal-mass estimate `max(0, −inf Wind~)` over sections of degree
/// `1..=max_degree`. `restarts` of 0 keeps the default.
///
/// # Safety
/// `curve` must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_estimate_minimal_mass(
    curve: *const PlCurve,
    max_degree: u32,
    restarts: usize,
    seed: u64,
    value: *mut f64,
) -> PlStatus {
    guard(|| {
        let mut opts = CriterionOptions {
            degrees: (1..=max_degree.max(1)).collect(),
            seed,
            ..CriterionOptions::default()
        };
        if restarts > 0 {
            opts.restarts = restarts;
        }
        let r = lift(estimate_minimal_mass(&handle(curve, "curve")?.0, &opts))?;
        write(value, r.minimal_mass_estimate)
    })
}

/// Running maximum of the best constants `C_d` at the point with
/// homogeneous coordinates `re + i im` over degrees `1..=max_degree`.
///
/// # Safety
/// `curve` must be live, `re` and `im` must hold `len` doubles each and
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_best_constant(
    curve: *const PlCurve,
    re: *const f64,
    im: *const f64,
    len: usize,
    max_degree: u32,
    value: *mut f64,
) -> PlStatus {
    guard(|| {
        let x = lift(ProjPoint::new(complex_slice(re, im, len)?))?;
        let degrees: Vec<u32> = (1..=max_degree.max(1)).collect();
        let est = lift(best_constant(
            &handle(curve, "curve")?.0,
            &x,
            &degrees,
            &HullOptions::default(),
        ))?;
        let top = est.by_degree.last().map_or(0.0, |d| d.running_max);
        write(value, top)
    })
}
