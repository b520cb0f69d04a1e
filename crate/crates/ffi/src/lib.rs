//! C ABI over the warped-product toolkit. Products are built from the same
//! JSON descriptors the CLI consumes and handed out as opaque pointers;
//! every call returns a status code and panics are caught at the boundary.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use warpcd_core::config::{run_config_text, RunOverrides, WarpedProductConfig};
use warpcd_core::curvature::{warped_ricci, TangentVector};
use warpcd_core::geodesics::{product_distance, SolverOptions};
use warpcd_core::kernels;
use warpcd_core::warp::{WarpedPoint, WarpedProduct};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpcdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SolverFailed = 4,
    InternalError = 5,
}

/// Opaque warped-product handle.
pub struct WarpcdProduct {
    product: WarpedProduct,
}

fn catch<F: FnOnce() -> WarpcdStatus>(f: F) -> WarpcdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => WarpcdStatus::InternalError,
    }
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn point_from_raw(
    handle: &WarpcdProduct,
    base: *const f64,
    base_len: usize,
    fiber: *const f64,
    fiber_len: usize,
) -> Result<WarpedPoint, WarpcdStatus> {
    let base = slice_arg(base, base_len).ok_or(WarpcdStatus::NullPointer)?;
    let fiber = slice_arg(fiber, fiber_len).ok_or(WarpcdStatus::NullPointer)?;
    let fiber_opt = if fiber_len == 0 { None } else { Some(fiber) };
    handle
        .product
        .point(base, fiber_opt)
        .map_err(|_| WarpcdStatus::InvalidArgument)
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn warpcd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Build a warped product from a JSON descriptor (same schema as the CLI's
/// `space` object). On success writes an owned handle to `out`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be valid for a
/// single pointer write.
#[no_mangle]
pub unsafe extern "C" fn warpcd_product_from_json(
    json: *const c_char,
    out: *mut *mut WarpcdProduct,
) -> WarpcdStatus {
    if json.is_null() || out.is_null() {
        return WarpcdStatus::NullPointer;
    }
    catch(|| {
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return WarpcdStatus::ParseError,
        };
        let config: WarpedProductConfig = match serde_json_from(text) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match config.build() {
            Ok(product) => {
                *out = Box::into_raw(Box::new(WarpcdProduct { product }));
                WarpcdStatus::Ok
            }
            Err(_) => WarpcdStatus::InvalidArgument,
        }
    })
}

fn serde_json_from(text: &str) -> Result<WarpedProductConfig, WarpcdStatus> {
    warpcd_core::config::parse_product_config(text).map_err(|_| WarpcdStatus::ParseError)
}

/// Release a handle returned by `warpcd_product_from_json`.
///
/// # Safety
/// `handle` must be a pointer previously returned by this library (or null).
#[no_mangle]
pub unsafe extern "C" fn warpcd_product_free(handle: *mut WarpcdProduct) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Distance between two points given in chart coordinates. A `fiber_len` of
/// zero denotes a collapsed point (no fiber coordinate).
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn warpcd_distance(
    handle: *const WarpcdProduct,
    base0: *const f64,
    base0_len: usize,
    fiber0: *const f64,
    fiber0_len: usize,
    base1: *const f64,
    base1_len: usize,
    fiber1: *const f64,
    fiber1_len: usize,
    tolerance: f64,
    out: *mut f64,
) -> WarpcdStatus {
    if handle.is_null() || out.is_null() {
        return WarpcdStatus::NullPointer;
    }
    catch(|| {
        let handle = &*handle;
        let a = match point_from_raw(handle, base0, base0_len, fiber0, fiber0_len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let b = match point_from_raw(handle, base1, base1_len, fiber1, fiber1_len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if !(tolerance > 0.0) {
            return WarpcdStatus::InvalidArgument;
        }
        let opts = SolverOptions { tol: tolerance, ..SolverOptions::default() };
        match product_distance(&handle.product, &a, &b, &opts) {
            Ok(d) if d.path.converged => {
                *out = d.length;
                WarpcdStatus::Ok
            }
            Ok(d) => {
                // upper bound only
                *out = d.length;
                WarpcdStatus::SolverFailed
            }
            Err(_) => WarpcdStatus::SolverFailed,
        }
    })
}

/// Warped-product Ricci curvature of a tangent vector; minus infinity is a
/// legitimate output value.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn warpcd_ricci(
    handle: *const WarpcdProduct,
    base: *const f64,
    base_len: usize,
    fiber: *const f64,
    fiber_len: usize,
    base_part: *const f64,
    base_part_len: usize,
    fiber_part: *const f64,
    fiber_part_len: usize,
    out: *mut f64,
) -> WarpcdStatus {
    if handle.is_null() || out.is_null() {
        return WarpcdStatus::NullPointer;
    }
    catch(|| {
        let handle = &*handle;
        let at = match point_from_raw(handle, base, base_len, fiber, fiber_len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let (Some(xi), Some(v)) = (
            slice_arg(base_part, base_part_len),
            slice_arg(fiber_part, fiber_part_len),
        ) else {
            return WarpcdStatus::NullPointer;
        };
        let u = TangentVector { at, base_part: xi.to_vec(), fiber_part: v.to_vec() };
        match warped_ricci(&handle.product, &u) {
            Ok(report) => {
                *out = report.value;
                WarpcdStatus::Ok
            }
            Err(_) => WarpcdStatus::InvalidArgument,
        }
    })
}

/// Generalized sine of the curvature comparison system.
#[no_mangle]
pub extern "C" fn warpcd_sn(k: f64, t: f64) -> f64 {
    kernels::sn(k, t.max(0.0))
}

/// Generalized cosine of the curvature comparison system.
#[no_mangle]
pub extern "C" fn warpcd_cn(k: f64, t: f64) -> f64 {
    kernels::cn(k, t.max(0.0))
}

/// Inner distortion coefficient; +inf past the critical length, NaN outside
/// the parameter domain.
#[no_mangle]
pub extern "C" fn warpcd_sigma(k: f64, n_minus_1: f64, t: f64, theta: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) || !(theta >= 0.0) {
        return f64::NAN;
    }
    kernels::sigma(k, n_minus_1, t, theta)
}

/// Volume distortion coefficient; +inf past the critical length, NaN outside
/// the parameter domain.
#[no_mangle]
pub extern "C" fn warpcd_tau(k: f64, n: f64, t: f64, theta: f64) -> f64 {
    if !(n >= 1.0) || !(0.0..=1.0).contains(&t) || !(theta >= 0.0) {
        return f64::NAN;
    }
    kernels::tau(k, n, t, theta)
}

/// Run a full experiment config (the CLI JSON schema) and write the CSV
/// artifact to `out_path`. Returns the CLI exit code semantics: 0 success,
/// 1 config error, 2 solver non-convergence, 3 invariant violation.
///
/// # Safety
/// `config_json` and `out_path` must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn warpcd_run_config(
    config_json: *const c_char,
    seed: u64,
    reproducible: bool,
    out_path: *const c_char,
) -> i32 {
    if config_json.is_null() || out_path.is_null() {
        return 1;
    }
    let result = catch_unwind(AssertUnwindSafe(|| {
        let text = match CStr::from_ptr(config_json).to_str() {
            Ok(t) => t,
            Err(_) => return 1,
        };
        let path = match CStr::from_ptr(out_path).to_str() {
            Ok(p) => p,
            Err(_) => return 1,
        };
        let overrides = RunOverrides { seed: Some(seed), threads: None, reproducible };
        match run_config_text(text, &overrides) {
            Ok((csv, status, _)) => {
                if std::fs::write(path, csv).is_err() {
                    return 1;
                }
                status.code()
            }
            Err(_) => 1,
        }
    }));
    result.unwrap_or(5)
}

/// Last-resort helper for bindings that want the version as an owned string;
/// free with `warpcd_string_free`.
#[no_mangle]
pub extern "C" fn warpcd_version_owned() -> *mut c_char {
    CString::new(env!("CARGO_PKG_VERSION"))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// # Safety
/// `s` must come from `warpcd_version_owned` (or be null).
#[no_mangle]
pub unsafe extern "C" fn warpcd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
