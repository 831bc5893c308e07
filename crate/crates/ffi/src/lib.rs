//! C interface to `linerig`. Instances live behind an opaque handle;
//! reports cross the boundary as UTF-8 JSON strings owned by the library
//! and released with [`linerig_string_free`].
//!
//! Every function returns a [`LinerigStatus`]. On failure a message is
//! available from [`linerig_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use linerig::analysis::{self, CertifyError, Ensure, RandomSpec, SamplingError};
use linerig::characterize::{replay_certificate, GlobalCertificate};
use linerig::instance::Instance;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinerigStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    VerdictIsNo = 4,
    Undecided = 5,
    SamplingBudgetExceeded = 6,
    InvalidArgument = 7,
    ReplayFailed = 8,
    Internal = 9,
    Panic = 10,
}

/// Opaque instance handle.
pub struct LinerigInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn fail(status: LinerigStatus, msg: impl Into<String>) -> LinerigStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> LinerigStatus) -> LinerigStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            fail(LinerigStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LinerigStatus> {
    if s.is_null() {
        return Err(fail(LinerigStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(LinerigStatus::InvalidUtf8, e.to_string()))
}

unsafe fn instance<'a>(h: *const LinerigInstance) -> Result<&'a Instance, LinerigStatus> {
    h.as_ref().map(|h| &h.inner).ok_or_else(|| fail(LinerigStatus::NullPointer, "null instance"))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> LinerigStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            LinerigStatus::Ok
        }
        Err(e) => fail(LinerigStatus::Internal, e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serialisable")
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn linerig_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn linerig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn linerig_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a format-1 instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linerig_instance_from_json(
    json: *const c_char,
    out: *mut *mut LinerigInstance,
) -> LinerigStatus {
    guard(|| {
        if out.is_null() {
            return fail(LinerigStatus::NullPointer, "null output");
        }
        let s = tri!(read_str(json));
        match Instance::from_json(s) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LinerigInstance { inner }));
                LinerigStatus::Ok
            }
            Err(e) => fail(LinerigStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `inst` must come from this library and not have been freed. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn linerig_instance_free(inst: *mut LinerigInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linerig_instance_to_json(
    inst: *const LinerigInstance,
    out: *mut *mut c_char,
) -> LinerigStatus {
    guard(|| {
        let i = tri!(instance(inst));
        if out.is_null() {
            return fail(LinerigStatus::NullPointer, "null output");
        }
        put_string(out, i.to_json())
    })
}

/// Vertex, edge and line counts. Any output pointer may be null.
///
/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn linerig_instance_sizes(
    inst: *const LinerigInstance,
    vertices: *mut usize,
    edges: *mut usize,
    lines: *mut usize,
) -> LinerigStatus {
    guard(|| {
        let i = tri!(instance(inst));
        for (p, v) in [(vertices, i.graph.n()), (edges, i.graph.edges().len()), (lines, i.lines.len())] {
            if !p.is_null() {
                *p = v;
            }
        }
        LinerigStatus::Ok
    })
}

/// Random instance. `ensure` is 0 for any verdict, 1 for YES, 2 for NO.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linerig_random(
    n: usize,
    k: usize,
    dim: usize,
    seed: u64,
    ensure: i32,
    out: *mut *mut LinerigInstance,
) -> LinerigStatus {
    guard(|| {
        if out.is_null() {
            return fail(LinerigStatus::NullPointer, "null output");
        }
        let ensure = match ensure {
            0 => None,
            1 => Some(Ensure::Yes),
            2 => Some(Ensure::No),
            x => return fail(LinerigStatus::InvalidArgument, format!("ensure must be 0, 1 or 2, got {x}")),
        };
        let spec = RandomSpec { ensure, ..RandomSpec::new(n, k, dim, seed) };
        match analysis::random_instance(&spec) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LinerigInstance { inner }));
                LinerigStatus::Ok
            }
            Err(e @ SamplingError::SamplingBudgetExceeded(_)) => {
                fail(LinerigStatus::SamplingBudgetExceeded, e.to_string())
            }
            Err(e) => fail(LinerigStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Full analysis report as JSON.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linerig_analyze(inst: *const LinerigInstance, out: *mut *mut c_char) -> LinerigStatus {
    guard(|| {
        let i = tri!(instance(inst));
        if out.is_null() {
            return fail(LinerigStatus::NullPointer, "null output");
        }
        put_string(out, to_json(&analysis::analyze(i)))
    })
}

/// Writes 1 or 0 to `out`; `Undecided` when the standing assumptions fail.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linerig_is_globally_rigid(inst: *const LinerigInstance, out: *mut i32) -> LinerigStatus {
    guard(|| {
        let i = tri!(instance(inst));
        if out.is_null() {
            return fail(LinerigStatus::NullPointer, "null output");
        }
        match linerig::characterize::decide_global(&i.graph, &i.lines) {
            Ok(c) => {
                *out = i32::from(c.decision);
                LinerigStatus::Ok
            }
            Err(e) => fail(LinerigStatus::Undecided, e.to_string()),
        }
    })
}

/// Certificate of global rigidity as JSON; `VerdictIsNo` otherwise.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linerig_certify(inst: *const LinerigInstance, out: *mut *mut c_char) -> LinerigStatus {
    guard(|| {
        let i = tri!(instance(inst));
        if out.is_null() {
            return fail(LinerigStatus::NullPointer, "null output");
        }
        match analysis::certify(i) {
            Ok(c) => put_string(out, to_json(&c)),
            Err(e @ CertifyError::VerdictIsNo(_)) => fail(LinerigStatus::VerdictIsNo, e.to_string()),
            Err(e) => fail(LinerigStatus::Undecided, e.to_string()),
        }
    })
}

/// Replays a certificate against the instance graph.
///
/// # Safety
/// `inst` must be a live handle; `cert_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn linerig_replay_certificate(
    inst: *const LinerigInstance,
    cert_json: *const c_char,
) -> LinerigStatus {
    guard(|| {
        let i = tri!(instance(inst));
        let s = tri!(read_str(cert_json));
        let cert: GlobalCertificate = match serde_json::from_str(s) {
            Ok(c) => c,
            Err(e) => return fail(LinerigStatus::ParseError, e.to_string()),
        };
        match replay_certificate(&i.graph, &cert) {
            Ok(()) => LinerigStatus::Ok,
            Err(e) => fail(LinerigStatus::ReplayFailed, e),
        }
    })
}

/// Cross-check report as JSON: combinatorial rigidity against exact rank,
/// and the global verdict against `restarts` oracle restarts.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linerig_verify(
    inst: *const LinerigInstance,
    restarts: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> LinerigStatus {
    guard(|| {
        let i = tri!(instance(inst));
        if out.is_null() {
            return fail(LinerigStatus::NullPointer, "null output");
        }
        match analysis::verify(i, restarts, seed) {
            Ok(r) => put_string(out, to_json(&r)),
            Err(e) => fail(LinerigStatus::Internal, e.to_string()),
        }
    })
}
