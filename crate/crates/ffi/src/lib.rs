//! C ABI over `grassdex`.
//!
//! Objects are opaque heap handles released by their `*_free` function.
//! Every fallible call returns a [`GdxStatus`]; on failure the message is
//! available from [`gdx_last_error`] on the same thread. Strings returned
//! through `char **` out-parameters are owned by the caller and must be
//! released with [`gdx_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grassdex::binquad::{enumerate_isotropic, spread};
use grassdex::clifford::build_design;
use grassdex::exactalg::format_rational;
use grassdex::grassmann::{expected_constant, verify_design, Configuration};
use grassdex::lattice::{catalog, minimal_sections, Lattice};
use grassdex::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GdxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    NotFound = 5,
    Unsupported = 6,
    Singular = 7,
    CapExceeded = 8,
    Io = 9,
    Panic = 10,
}

pub struct GdxConfiguration(Configuration);

pub struct GdxLattice(Lattice);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> GdxStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => GdxStatus::Parse,
        Error::NotFound(_) => GdxStatus::NotFound,
        Error::Unsupported(_) => GdxStatus::Unsupported,
        Error::Singular => GdxStatus::Singular,
        Error::CapExceeded { .. } => GdxStatus::CapExceeded,
        Error::Io(_) => GdxStatus::Io,
        _ => GdxStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), GdxStatus>) -> GdxStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GdxStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            GdxStatus::Panic
        }
    }
}

fn lift<T>(r: grassdex::Result<T>) -> Result<T, GdxStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, GdxStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(GdxStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        GdxStatus::InvalidUtf8
    })
}

fn check_out<T>(out: *mut T) -> Result<(), GdxStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(GdxStatus::NullPointer);
    }
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), GdxStatus> {
    check_out(out)?;
    let c = CString::new(s).map_err(|_| {
        set_error("string contains NUL");
        GdxStatus::InvalidArgument
    })?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, GdxStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        GdxStatus::NullPointer
    })
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn gdx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn gdx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses configuration JSON (`{"n", "m", "points", "gram"?}`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_configuration_from_json(json: *const c_char, out: *mut *mut GdxConfiguration) -> GdxStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(json)?;
        let cfg = lift(Configuration::from_json_str(text))?;
        *out = Box::into_raw(Box::new(GdxConfiguration(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gdx_configuration_free(cfg: *mut GdxConfiguration) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gdx_configuration_len(cfg: *const GdxConfiguration) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.len())
}

/// Subspace dimension `m`, or 0 for NULL.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gdx_configuration_dim(cfg: *const GdxConfiguration) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.m())
}

/// Ambient dimension `n`, or 0 for NULL.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gdx_configuration_ambient(cfg: *const GdxConfiguration) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.n())
}

/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_configuration_to_json(cfg: *const GdxConfiguration, out: *mut *mut c_char) -> GdxStatus {
    guard(|| {
        let c = handle(cfg)?;
        put_string(out, c.0.to_json_string())
    })
}

/// Checks the configuration for `t = 1..=t`; `*is_design` is 1 when it is a
/// `2t`-design. When `report_json` is not NULL it receives the full report.
///
/// # Safety
/// `cfg` must be a live handle; `is_design` must be valid; `report_json` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn gdx_verify_design(
    cfg: *const GdxConfiguration,
    t: u32,
    is_design: *mut i32,
    report_json: *mut *mut c_char,
) -> GdxStatus {
    guard(|| {
        let c = handle(cfg)?;
        check_out(is_design)?;
        let report = lift(verify_design(&c.0, t))?;
        *is_design = i32::from(report.strength >= t);
        if !report_json.is_null() {
            let text = serde_json::to_string(&report).map_err(|e| {
                set_error(e.to_string());
                GdxStatus::Parse
            })?;
            put_string(report_json, text)?;
        }
        Ok(())
    })
}

/// Catalog lattice by name (`Z<n>`, `D4`, `E6`, `E7`, `E8`, `BW4`, `BW8`, `BW16`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_lattice_catalog(name: *const c_char, out: *mut *mut GdxLattice) -> GdxStatus {
    guard(|| {
        check_out(out)?;
        let l = lift(catalog(read_str(name)?))?;
        *out = Box::into_raw(Box::new(GdxLattice(l)));
        Ok(())
    })
}

/// Lattice from JSON with a `basis` or `gram` field.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_lattice_from_json(json: *const c_char, out: *mut *mut GdxLattice) -> GdxStatus {
    guard(|| {
        check_out(out)?;
        let l = lift(Lattice::from_json_str(read_str(json)?))?;
        *out = Box::into_raw(Box::new(GdxLattice(l)));
        Ok(())
    })
}

/// # Safety
/// `lat` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gdx_lattice_free(lat: *mut GdxLattice) {
    if !lat.is_null() {
        drop(Box::from_raw(lat));
    }
}

/// Determinant as a rational string.
///
/// # Safety
/// `lat` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_lattice_det(lat: *const GdxLattice, out: *mut *mut c_char) -> GdxStatus {
    guard(|| {
        let l = handle(lat)?;
        put_string(out, format_rational(&l.0.det()))
    })
}

/// Minimal `m`-sections as a configuration.
///
/// # Safety
/// `lat` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_lattice_sections(lat: *const GdxLattice, m: usize, out: *mut *mut GdxConfiguration) -> GdxStatus {
    guard(|| {
        let l = handle(lat)?;
        check_out(out)?;
        let s = lift(minimal_sections(&l.0, m, None))?;
        let cfg = lift(s.configuration(&l.0))?;
        *out = Box::into_raw(Box::new(GdxConfiguration(cfg)));
        Ok(())
    })
}

/// `D_Sigma` for all totally isotropic `w`-subspaces (`use_spread == 0`) or a spread.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_clifford_design(k: usize, w: usize, use_spread: i32, out: *mut *mut GdxConfiguration) -> GdxStatus {
    guard(|| {
        check_out(out)?;
        let sigma = lift(if use_spread != 0 { spread(k, w) } else { enumerate_isotropic(k, w) })?;
        let build = lift(build_design(&sigma))?;
        *out = Box::into_raw(Box::new(GdxConfiguration(build.configuration)));
        Ok(())
    })
}

/// `c_{m,n}(2t)` as a rational string.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gdx_constant_c(m: usize, n: usize, t: u32, out: *mut *mut c_char) -> GdxStatus {
    guard(|| {
        let c = lift(expected_constant(m, n, t))?;
        put_string(out, format_rational(&c))
    })
}

/// Library version string (static, do not free).
#[no_mangle]
pub extern "C" fn gdx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
