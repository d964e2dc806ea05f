//! C ABI over the dualgeo library: opaque manifold handles, status codes,
//! and JSON-lines reports. The header is generated into `include/dualgeo.h`
//! by the build script.
//!
//! Ownership rules: every `char*` returned through an out-parameter is
//! allocated by this library and must be released with [`dg_string_free`];
//! manifold handles are released with [`dg_manifold_free`]. On any status
//! other than `DG_OK`, [`dg_last_error`] returns a thread-local message
//! valid until the next failing call on the same thread.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use dualgeo::manifold::Manifold;
use dualgeo::suites::{self, RunConfig};
use dualgeo::{specfile, zoo};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum dg_status {
    DG_OK = 0,
    /// A required pointer argument was null.
    DG_ERR_NULL_ARG = 1,
    /// An input string was not valid UTF-8.
    DG_ERR_UTF8 = 2,
    /// The spec text failed to parse or validate.
    DG_ERR_PARSE = 3,
    /// Unknown zoo entry or suite name.
    DG_ERR_UNKNOWN = 4,
    /// A suite failed to evaluate.
    DG_ERR_RUN = 5,
}

/// Opaque manifold handle.
pub struct dg_manifold {
    inner: Manifold,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).unwrap_or_default();
    });
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dg_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

unsafe fn read_utf8<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, dg_status> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(dg_status::DG_ERR_NULL_ARG);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        dg_status::DG_ERR_UTF8
    })
}

fn hand_out(out: *mut *mut c_char, text: String) -> dg_status {
    let c = match CString::new(text.replace('\0', " ")) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained an interior NUL");
            return dg_status::DG_ERR_RUN;
        }
    };
    unsafe {
        *out = c.into_raw();
    }
    dg_status::DG_OK
}

/// Load a built-in zoo entry by name.
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn dg_manifold_from_zoo(
    name: *const c_char,
    out: *mut *mut dg_manifold,
) -> dg_status {
    if out.is_null() {
        set_error("out is null");
        return dg_status::DG_ERR_NULL_ARG;
    }
    let name = match read_utf8(name, "name") {
        Ok(s) => s,
        Err(e) => return e,
    };
    match zoo::by_name(name) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(dg_manifold { inner: m }));
            dg_status::DG_OK
        }
        Err(e) => {
            set_error(e.to_string());
            dg_status::DG_ERR_UNKNOWN
        }
    }
}

/// Parse a manifold description (the spec-file format) from text.
///
/// # Safety
/// `text` and `name` must be valid NUL-terminated strings; `out` must be a
/// valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn dg_manifold_from_spec_text(
    text: *const c_char,
    name: *const c_char,
    out: *mut *mut dg_manifold,
) -> dg_status {
    if out.is_null() {
        set_error("out is null");
        return dg_status::DG_ERR_NULL_ARG;
    }
    let text = match read_utf8(text, "text") {
        Ok(s) => s,
        Err(e) => return e,
    };
    let name = match read_utf8(name, "name") {
        Ok(s) => s,
        Err(e) => return e,
    };
    match specfile::parse(text, name) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(dg_manifold { inner: m }));
            dg_status::DG_OK
        }
        Err(e) => {
            set_error(e.to_string());
            dg_status::DG_ERR_PARSE
        }
    }
}

/// Release a manifold handle. Null is tolerated.
///
/// # Safety
/// `m` must be a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dg_manifold_free(m: *mut dg_manifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Run check suites. `suites_csv` is a comma-separated list of suite names
/// or `all`/null for the full catalog. On success `json_out` receives one
/// JSON record per check, newline-delimited, in catalog order.
///
/// # Safety
/// `m` must be a live handle; `json_out` must be valid. The result must be
/// released with `dg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn dg_run_suites(
    m: *const dg_manifold,
    suites_csv: *const c_char,
    tol: f64,
    grid: u32,
    seed: u64,
    json_out: *mut *mut c_char,
) -> dg_status {
    if m.is_null() || json_out.is_null() {
        set_error("manifold or out pointer is null");
        return dg_status::DG_ERR_NULL_ARG;
    }
    let selected: Vec<String> = if suites_csv.is_null() {
        vec!["all".into()]
    } else {
        match read_utf8(suites_csv, "suites_csv") {
            Ok(s) => s
                .split(',')
                .map(|p| p.trim().to_string())
                .filter(|p| !p.is_empty())
                .collect(),
            Err(e) => return e,
        }
    };
    let cfg = RunConfig {
        tol,
        grid: grid as usize,
        seed,
    };
    let manifold = &(*m).inner;
    match suites::run(manifold, &selected, &cfg) {
        Ok(reports) => {
            let mut body = String::new();
            for r in &reports {
                body.push_str(&r.json_line());
                body.push('\n');
            }
            hand_out(json_out, body)
        }
        Err(e) => {
            let msg = e.to_string();
            let status = if msg.contains("known suite") {
                dg_status::DG_ERR_UNKNOWN
            } else {
                dg_status::DG_ERR_RUN
            };
            set_error(msg);
            status
        }
    }
}

/// Render the manifold in the spec-file format.
///
/// # Safety
/// `m` must be a live handle; `text_out` must be valid. The result must be
/// released with `dg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn dg_export_spec(
    m: *const dg_manifold,
    text_out: *mut *mut c_char,
) -> dg_status {
    if m.is_null() || text_out.is_null() {
        set_error("manifold or out pointer is null");
        return dg_status::DG_ERR_NULL_ARG;
    }
    match specfile::export(&(*m).inner) {
        Ok(text) => hand_out(text_out, text),
        Err(e) => {
            set_error(e.to_string());
            dg_status::DG_ERR_RUN
        }
    }
}

/// Newline-separated zoo entry names.
///
/// # Safety
/// `text_out` must be valid; release the result with `dg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn dg_zoo_names(text_out: *mut *mut c_char) -> dg_status {
    if text_out.is_null() {
        set_error("out pointer is null");
        return dg_status::DG_ERR_NULL_ARG;
    }
    hand_out(text_out, zoo::ZOO_NAMES.join("\n"))
}

/// Release a string allocated by this library. Null is tolerated.
///
/// # Safety
/// `s` must originate from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn zoo_handle_runs_suites() {
        let mut handle: *mut dg_manifold = ptr::null_mut();
        let name = c("darboux-3");
        let status = unsafe { dg_manifold_from_zoo(name.as_ptr(), &mut handle) };
        assert_eq!(status, dg_status::DG_OK);
        assert!(!handle.is_null());

        let mut out: *mut c_char = ptr::null_mut();
        let suites = c("duality,gauge");
        let status =
            unsafe { dg_run_suites(handle, suites.as_ptr(), 1e-8, 3, 42, &mut out) };
        assert_eq!(status, dg_status::DG_OK);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
        assert!(text.lines().count() >= 10);
        assert!(text.contains("\"check\":\"gauge-residual\""));
        assert!(text.contains("\"status\":\"pass\""));
        unsafe {
            dg_string_free(out);
            dg_manifold_free(handle);
        }
    }

    #[test]
    fn spec_text_round_trip() {
        let mut handle: *mut dg_manifold = ptr::null_mut();
        let name = c("torus");
        unsafe { dg_manifold_from_zoo(name.as_ptr(), &mut handle) };
        let mut out: *mut c_char = ptr::null_mut();
        let status = unsafe { dg_export_spec(handle, &mut out) };
        assert_eq!(status, dg_status::DG_OK);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();

        let mut reparsed: *mut dg_manifold = ptr::null_mut();
        let ctext = c(&text);
        let cname = c("torus-copy");
        let status = unsafe {
            dg_manifold_from_spec_text(ctext.as_ptr(), cname.as_ptr(), &mut reparsed)
        };
        assert_eq!(status, dg_status::DG_OK);
        unsafe {
            dg_string_free(out);
            dg_manifold_free(handle);
            dg_manifold_free(reparsed);
        }
    }

    #[test]
    fn error_paths_set_messages() {
        let mut handle: *mut dg_manifold = ptr::null_mut();
        let name = c("not-a-zoo-entry");
        let status = unsafe { dg_manifold_from_zoo(name.as_ptr(), &mut handle) };
        assert_eq!(status, dg_status::DG_ERR_UNKNOWN);
        let msg = unsafe { CStr::from_ptr(dg_last_error()) }.to_str().unwrap();
        assert!(msg.contains("not-a-zoo-entry"));

        let status = unsafe { dg_manifold_from_zoo(ptr::null(), &mut handle) };
        assert_eq!(status, dg_status::DG_ERR_NULL_ARG);

        let bad = c("[chart]\ncoords = x y\n[metric]\ng 0 9 = 1\n");
        let cname = c("bad");
        let mut out: *mut dg_manifold = ptr::null_mut();
        let status =
            unsafe { dg_manifold_from_spec_text(bad.as_ptr(), cname.as_ptr(), &mut out) };
        assert_eq!(status, dg_status::DG_ERR_PARSE);
    }

    #[test]
    fn unknown_suite_is_reported() {
        let mut handle: *mut dg_manifold = ptr::null_mut();
        let name = c("gaussian");
        unsafe { dg_manifold_from_zoo(name.as_ptr(), &mut handle) };
        let mut out: *mut c_char = ptr::null_mut();
        let suites = c("no-such-suite");
        let status =
            unsafe { dg_run_suites(handle, suites.as_ptr(), 1e-8, 3, 42, &mut out) };
        assert_eq!(status, dg_status::DG_ERR_UNKNOWN);
        unsafe { dg_manifold_free(handle) };
    }
}
