//! C ABI over the `umbilic` library.
//!
//! Every entry point returns a [`UmbStatus`]; on failure the message is
//! available from [`umb_last_error`] on the same thread until the next call.
//! Strings handed out by the library are released with [`umb_string_free`],
//! surfaces with [`umb_surface_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use umbilic::catalog::{self, CatalogEntry};
use umbilic::flows::{self, CurveState};
use umbilic::output::{to_json, DEFAULT_DIGITS};
use umbilic::phaseplane::{self, PhaseParams, PhasePoint};
use umbilic::verify::{self, VerifyConfig};
use umbilic::{Error, HorizontalVector, Point};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UmbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The point or parameters are outside the domain of the computation
    /// (singular point, off the surface, non-periodic orbit, ...).
    Domain = 3,
    InvalidUtf8 = 4,
    Panic = 5,
}

/// Opaque catalog surface.
pub struct UmbSurface {
    entry: CatalogEntry,
}

/// Scalar invariants at a point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UmbReport {
    pub alpha: f64,
    pub k: f64,
    pub l: f64,
    pub mean_curvature: f64,
    pub xn_residual: f64,
    pub spread: f64,
    pub umbilic: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(UmbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Dimension(_)
            | Error::Length { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NonFinite
            | Error::InvalidArgument(_) => UmbStatus::InvalidArgument,
            _ => UmbStatus::Domain,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(UmbStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> UmbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            UmbStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UmbStatus::Panic
        }
    }
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(UmbStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    nonnull(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(UmbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    nonnull(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    nonnull(out, "out")?;
    let c = CString::new(s).map_err(|_| invalid("output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn umb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn umb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn umb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a catalog surface by name (`pansu`, `heisenberg-sphere`,
/// `shifted-sphere`, `cylinder`, `hyperplane`) with `count` named parameters.
///
/// # Safety
/// `name` must be a NUL-terminated string; `keys` and `values` must hold
/// `count` entries (they may be null when `count` is 0); `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_new(
    name: *const c_char,
    n: usize,
    keys: *const *const c_char,
    values: *const f64,
    count: usize,
    out: *mut *mut UmbSurface,
) -> UmbStatus {
    guard(|| {
        nonnull(out, "out")?;
        let name = str_arg(name, "name")?;
        let mut params = BTreeMap::new();
        if count > 0 {
            nonnull(keys, "keys")?;
            let vals = slice_arg(values, count, "values")?;
            for (i, v) in vals.iter().enumerate() {
                params.insert(str_arg(*keys.add(i), "key")?.to_string(), *v);
            }
        }
        let entry = catalog::by_name(name, n, &params)?;
        *out = Box::into_raw(Box::new(UmbSurface { entry }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`umb_surface_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_free(s: *mut UmbSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

unsafe fn report_at(
    s: *const UmbSurface,
    coords: *const f64,
    len: usize,
) -> Result<umbilic::SurfaceReport, Fail> {
    nonnull(s, "surface")?;
    let p = Point::from_coords(slice_arg(coords, len, "coords")?)?;
    Ok((*s).entry.report(&p)?)
}

/// Scalar invariants at the on-surface point `coords = (x.., y.., t)`.
///
/// # Safety
/// `s` must be a live surface, `coords` must hold `len` values, `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_report(
    s: *const UmbSurface,
    coords: *const f64,
    len: usize,
    out: *mut UmbReport,
) -> UmbStatus {
    guard(|| {
        nonnull(out, "out")?;
        let r = report_at(s, coords, len)?;
        *out = UmbReport {
            alpha: r.alpha(),
            k: r.k,
            l: r.l,
            mean_curvature: r.mean_curvature,
            xn_residual: r.xn_residual,
            spread: r.spread,
            umbilic: r.umbilic,
        };
        Ok(())
    })
}

/// The full report as JSON; free the string with [`umb_string_free`].
///
/// # Safety
/// As for [`umb_surface_report`].
#[no_mangle]
pub unsafe extern "C" fn umb_surface_report_json(
    s: *const UmbSurface,
    coords: *const f64,
    len: usize,
    out: *mut *mut c_char,
) -> UmbStatus {
    guard(|| {
        let r = report_at(s, coords, len)?;
        put_string(out, to_json(&r, DEFAULT_DIGITS))
    })
}

/// Period and closure error of the orbit of the `(α, β)` system through
/// `(alpha, beta)`.
///
/// # Safety
/// `period` and `closure` must be valid.
#[no_mangle]
pub unsafe extern "C" fn umb_phase_period(
    n: usize,
    c: f64,
    alpha: f64,
    beta: f64,
    period: *mut f64,
    closure: *mut f64,
) -> UmbStatus {
    guard(|| {
        nonnull(period, "period")?;
        nonnull(closure, "closure")?;
        let pp = PhaseParams::new(n, c)?;
        let o = phaseplane::periodic_orbit(&pp, &PhasePoint::new(alpha, beta))?;
        *period = o.period.unwrap_or(f64::NAN);
        *closure = o.closure_error.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// End state of the curvature-`lambda` geodesic from `(coords, v)` after
/// length `s_max`: writes `2n+1` coordinates to `end_coords` and `2n` frame
/// coefficients to `end_v`.
///
/// # Safety
/// `coords`/`end_coords` must hold `len` values, `v`/`end_v` `len − 1`.
#[no_mangle]
pub unsafe extern "C" fn umb_geodesic_end(
    coords: *const f64,
    v: *const f64,
    len: usize,
    lambda: f64,
    s_max: f64,
    end_coords: *mut f64,
    end_v: *mut f64,
) -> UmbStatus {
    guard(|| {
        if len == 0 {
            return Err(invalid("len must be 2n + 1"));
        }
        nonnull(end_coords, "end_coords")?;
        nonnull(end_v, "end_v")?;
        let p = Point::from_coords(slice_arg(coords, len, "coords")?)?;
        let v = HorizontalVector(slice_arg(v, len - 1, "v")?.to_vec());
        let curve = flows::geodesic_flow(&CurveState { p, v }, lambda, s_max)?;
        let last = curve.last().ok_or_else(|| invalid("empty curve"))?;
        ptr::copy_nonoverlapping(last.p.coords().as_ptr(), end_coords, len);
        ptr::copy_nonoverlapping(last.v.coeffs().as_ptr(), end_v, len - 1);
        Ok(())
    })
}

/// Runs the claim verification and returns the JSON report. `only` may be
/// null. `passed` receives whether every claim passed.
///
/// # Safety
/// `only` must be null or a NUL-terminated string; `out` and `passed` must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn umb_verify_json(
    seed: u64,
    only: *const c_char,
    out: *mut *mut c_char,
    passed: *mut bool,
) -> UmbStatus {
    guard(|| {
        nonnull(passed, "passed")?;
        let only = if only.is_null() {
            None
        } else {
            Some(str_arg(only, "only")?.to_string())
        };
        let r = verify::run_all(&VerifyConfig {
            seed,
            only,
            fault: None,
        });
        *passed = r.passed;
        put_string(out, to_json(&r, DEFAULT_DIGITS))
    })
}
