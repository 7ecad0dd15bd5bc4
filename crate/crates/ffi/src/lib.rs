//! C ABI for `lslopes`.
//!
//! Configurations and reports are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`LsStatus`]; the message for the most recent failure on the calling
//! thread is available from [`ls_last_error`]. Strings returned to C are
//! released with [`ls_string_free`].
//!
//! Pointer arguments must be NULL or come from this library (handles) or
//! point to the documented number of valid elements (buffers).

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use lslopes::cli::{exit_code, run_verify, Route, RunConfig, Verdict, VerifyReport};
use lslopes::polygons::predict_theorem2;
use lslopes::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NotPrime = 3,
    Budget = 4,
    Precision = 5,
    BufferTooSmall = 6,
    Overflow = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsRoute {
    Predict = 0,
    Lfun = 1,
    Dwork = 2,
    Lemma = 3,
    Verify = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsVerdict {
    Match = 0,
    PrefixMatch = 1,
    Mismatch = 2,
    HypothesisFailed = 3,
    Incomplete = 4,
}

/// Opaque run configuration.
pub struct LsConfig {
    inner: RunConfig,
}

/// Opaque verification report.
pub struct LsReport {
    inner: VerifyReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> LsStatus {
    match e {
        Error::NotPrime(_) => LsStatus::NotPrime,
        Error::InvalidInput(_) => LsStatus::InvalidInput,
        Error::Budget { .. } => LsStatus::Budget,
        Error::Precision(_) | Error::Truncation(_) => LsStatus::Precision,
        Error::Overflow(_) => LsStatus::Overflow,
        _ => LsStatus::Internal,
    }
}

fn fail(e: Error) -> LsStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn guarded(f: impl FnOnce() -> LsStatus) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            LsStatus::Panic
        }
    }
}

fn with_config(cfg: *mut LsConfig, f: impl FnOnce(&mut RunConfig) -> LsStatus) -> LsStatus {
    guarded(|| {
        // SAFETY: non-null handles come from `ls_config_new` and are not shared.
        match unsafe { cfg.as_mut() } {
            Some(c) => f(&mut c.inner),
            None => {
                set_error("null config handle");
                LsStatus::NullPointer
            }
        }
    })
}

/// New configuration for `x^d + x^{d-1}` over `F_p` with `M = 1`, route
/// verify, one thread and no cache. Returns NULL only on allocation panic.
#[no_mangle]
pub extern "C" fn ls_config_new(p: u64, d: u32) -> *mut LsConfig {
    catch_unwind(|| Box::into_raw(Box::new(LsConfig { inner: RunConfig::new(p, d, 1, 1, vec![1], Route::Verify) })))
        .unwrap_or(ptr::null_mut())
}

/// Releases a configuration. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ls_config_free(cfg: *mut LsConfig) {
    if !cfg.is_null() {
        // SAFETY: the pointer came from `ls_config_new` and is freed once.
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Sets `h` and resets `a` to `1` in the canonical basis.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_h(cfg: *mut LsConfig, h: usize) -> LsStatus {
    with_config(cfg, |c| {
        if h == 0 {
            return fail(Error::InvalidInput("h must be >= 1".into()));
        }
        c.h = h;
        c.a = vec![0; h];
        c.a[0] = 1;
        LsStatus::Ok
    })
}

/// Coordinates of `a`; `len` must equal the current `h`.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_a(cfg: *mut LsConfig, coords: *const u64, len: usize) -> LsStatus {
    with_config(cfg, |c| {
        if coords.is_null() {
            set_error("null coordinate array");
            return LsStatus::NullPointer;
        }
        if len != c.h {
            return fail(Error::InvalidInput(format!("a needs {} coordinate(s), got {len}", c.h)));
        }
        // SAFETY: the caller guarantees `len` readable elements.
        c.a = unsafe { std::slice::from_raw_parts(coords, len) }.to_vec();
        LsStatus::Ok
    })
}

/// Character level `M` (order `p^M`).
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_level(cfg: *mut LsConfig, level: u32) -> LsStatus {
    with_config(cfg, |c| {
        c.level = level;
        LsStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn ls_config_set_route(cfg: *mut LsConfig, route: LsRoute) -> LsStatus {
    with_config(cfg, |c| {
        c.route = match route {
            LsRoute::Predict => Route::Predict,
            LsRoute::Lfun => Route::Lfun,
            LsRoute::Dwork => Route::Dwork,
            LsRoute::Lemma => Route::Lemma,
            LsRoute::Verify => Route::Verify,
        };
        LsStatus::Ok
    })
}

/// Largest `m` enumerated; 0 means up to the degree.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_max_m(cfg: *mut LsConfig, max_m: u32) -> LsStatus {
    with_config(cfg, |c| {
        c.max_m = (max_m > 0).then_some(max_m);
        LsStatus::Ok
    })
}

/// Dwork matrix size; 0 means the default.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_truncation(cfg: *mut LsConfig, n: usize) -> LsStatus {
    with_config(cfg, |c| {
        c.truncation = (n > 0).then_some(n);
        LsStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn ls_config_set_threads(cfg: *mut LsConfig, threads: usize) -> LsStatus {
    with_config(cfg, |c| {
        if threads == 0 {
            return fail(Error::InvalidInput("threads must be >= 1".into()));
        }
        c.threads = threads;
        LsStatus::Ok
    })
}

/// Cache directory for exponential sums; NULL disables the cache.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_cache_dir(cfg: *mut LsConfig, dir: *const c_char) -> LsStatus {
    with_config(cfg, |c| {
        if dir.is_null() {
            c.cache_dir = None;
            return LsStatus::Ok;
        }
        // SAFETY: the caller passes a NUL-terminated string.
        match unsafe { CStr::from_ptr(dir) }.to_str() {
            Ok(s) => {
                c.cache_dir = Some(PathBuf::from(s));
                LsStatus::Ok
            }
            Err(_) => fail(Error::InvalidInput("cache directory is not UTF-8".into())),
        }
    })
}

/// Runs the configured routes. On `LS_STATUS_OK` `*out` owns a report.
/// Budget and precision trouble inside a route is part of the report, not
/// a failing status.
#[no_mangle]
pub unsafe extern "C" fn ls_verify(cfg: *const LsConfig, out: *mut *mut LsReport) -> LsStatus {
    guarded(|| {
        // SAFETY: handles come from this library; `out` is writable.
        let (Some(c), false) = (unsafe { cfg.as_ref() }, out.is_null()) else {
            set_error("null argument");
            return LsStatus::NullPointer;
        };
        match run_verify(&c.inner) {
            Ok(r) => {
                unsafe { *out = Box::into_raw(Box::new(LsReport { inner: r })) };
                LsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ls_report_free(report: *mut LsReport) {
    if !report.is_null() {
        // SAFETY: the pointer came from `ls_verify` and is freed once.
        drop(unsafe { Box::from_raw(report) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn ls_report_verdict(report: *const LsReport, out: *mut LsVerdict) -> LsStatus {
    guarded(|| {
        // SAFETY: as in `ls_verify`.
        let (Some(r), false) = (unsafe { report.as_ref() }, out.is_null()) else {
            set_error("null argument");
            return LsStatus::NullPointer;
        };
        let v = match r.inner.verdict {
            Verdict::Match => LsVerdict::Match,
            Verdict::PrefixMatch => LsVerdict::PrefixMatch,
            Verdict::Mismatch => LsVerdict::Mismatch,
            Verdict::HypothesisFailed => LsVerdict::HypothesisFailed,
            Verdict::Incomplete => LsVerdict::Incomplete,
        };
        unsafe { *out = v };
        LsStatus::Ok
    })
}

/// Process exit code the CLI would use for this report; -1 for NULL.
#[no_mangle]
pub unsafe extern "C" fn ls_report_exit_code(report: *const LsReport) -> i32 {
    // SAFETY: as in `ls_verify`.
    unsafe { report.as_ref() }.map_or(-1, |r| exit_code(&r.inner))
}

/// The report as JSON; free with `ls_string_free`. NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn ls_report_json(report: *const LsReport) -> *mut c_char {
    // SAFETY: as in `ls_verify`.
    let Some(r) = (unsafe { report.as_ref() }) else {
        set_error("null report handle");
        return ptr::null_mut();
    };
    catch_unwind(AssertUnwindSafe(|| CString::new(r.inner.to_json()).map(CString::into_raw)))
        .ok()
        .and_then(Result::ok)
        .unwrap_or_else(|| {
            set_error("cannot render report");
            ptr::null_mut()
        })
}

#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the string came from this library and is freed once.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Predicted slopes as `nums[i]/dens[i]`. `*len` receives the slope count;
/// if it exceeds `cap` nothing is written and `LS_STATUS_BUFFER_TOO_SMALL`
/// is returned, so a first call with `cap = 0` sizes the buffers.
#[no_mangle]
pub unsafe extern "C" fn ls_predicted_slopes(
    p: u64,
    d: u32,
    h: u32,
    level: u32,
    nums: *mut i64,
    dens: *mut i64,
    cap: usize,
    len: *mut usize,
) -> LsStatus {
    guarded(|| {
        if len.is_null() {
            set_error("null length pointer");
            return LsStatus::NullPointer;
        }
        if let Err(e) = lslopes::exact::ensure_prime(p) {
            return fail(e);
        }
        if d < 2 || h == 0 || level == 0 || p.checked_pow(level - 1).is_none_or(|r| r > 1 << 20) {
            return fail(Error::InvalidInput("need d >= 2, h >= 1 and a small p^(M-1)".into()));
        }
        let slopes = predict_theorem2(d, p, h, level).slopes;
        // SAFETY: `len` is non-null and writable.
        unsafe { *len = slopes.len() };
        if slopes.len() > cap {
            set_error(format!("need room for {} slopes", slopes.len()));
            return LsStatus::BufferTooSmall;
        }
        if nums.is_null() || dens.is_null() {
            set_error("null output buffer");
            return LsStatus::NullPointer;
        }
        for (i, s) in slopes.iter().enumerate() {
            let (Ok(n), Ok(q)) = (i64::try_from(s.numer()), i64::try_from(s.denom())) else {
                return fail(Error::Overflow("slope does not fit in int64".into()));
            };
            // SAFETY: the caller provides `cap >= len` writable slots.
            unsafe {
                *nums.add(i) = n;
                *dens.add(i) = q;
            }
        }
        LsStatus::Ok
    })
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
