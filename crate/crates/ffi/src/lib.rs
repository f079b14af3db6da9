//! C ABI over the `nonlocal` library.
//!
//! Boxes and Boolean functions are opaque heap handles released with
//! `nl_box_free` and `nl_anf_free`. Every fallible call returns an
//! [`NlStatus`] and writes its result through an out-pointer only on success;
//! the message for the most recent failure on the calling thread is available
//! from [`nl_last_error_message`]. Rationals cross the boundary as `"p/q"`
//! strings so no precision is lost. Returned strings are owned by the caller
//! and released with [`nl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nonlocal::boxes::{is_non_signaling, make_correlated, make_even_parity, make_full_correlation, make_npr};
use nonlocal::boxfile::{box_from_json, box_to_json};
use nonlocal::commcost::{amplifiable, n_distill_bound, n_scratch};
use nonlocal::distill::{iterate, t_map};
use nonlocal::locality::is_local;
use nonlocal::rational::{format_rational, parse_rational, parse_unit};
use nonlocal::report::analyze;
use nonlocal::wiring::compose_triangle;
use nonlocal::{AnfFunction, BoxTable, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument was rejected: bad party count, parameter or syntax.
    InvalidArgument = 3,
    /// The operation does not apply to this input.
    Precondition = 4,
    /// The input exceeds a size the exact algorithms support.
    SizeLimit = 5,
    /// Malformed box or wiring data.
    Format = 6,
    /// A Rust panic was caught at the boundary; this is a library bug.
    Internal = 7,
}

/// Opaque handle to a box.
pub struct NlBox(BoxTable);

/// Opaque handle to a Boolean function in algebraic normal form.
pub struct NlAnf(AnfFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Precondition(_) | Error::UnreachableExactly(_) => NlStatus::Precondition,
            Error::SizeLimit(_) => NlStatus::SizeLimit,
            Error::Format(_)
            | Error::Io { .. }
            | Error::NegativeProbability { .. }
            | Error::NotNormalized { .. }
            | Error::Wiring(_)
            | Error::Causality { .. } => NlStatus::Format,
            _ => NlStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NlStatus::NullPointer, format!("{what} is null"))
}

fn record(status: NlStatus, message: String) -> NlStatus {
    // interior NULs cannot occur in library messages, but never fail here
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
    status
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> NlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NlStatus::Ok,
        Ok(Err(Failure(status, message))) => record(status, message),
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            record(NlStatus::Internal, format!("internal error: {message}"))
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| Failure(NlStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn put_box(out: *mut *mut NlBox, b: BoxTable) -> Result<(), Failure> {
    unsafe { put(out, Box::into_raw(Box::new(NlBox(b)))) }
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let s = CString::new(s).map_err(|e| Failure(NlStatus::Internal, e.to_string()))?;
    unsafe { put(out, s.into_raw()) }
}

/// Message for the last failed call on this thread, or null if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// The n-party PR box: outputs have parity `x_1 ⋯ x_n`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_npr(n: usize, out: *mut *mut NlBox) -> NlStatus {
    guard(|| unsafe { put_box(out, make_npr(n)?) })
}

/// The uniformly random even-parity box.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_even_parity(n: usize, out: *mut *mut NlBox) -> NlStatus {
    guard(|| unsafe { put_box(out, make_even_parity(n)?) })
}

/// `eps·PR + (1-eps)·even-parity`, with `eps` a rational string in `[0, 1]`.
///
/// # Safety
/// `eps` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_correlated(n: usize, eps: *const c_char, out: *mut *mut NlBox) -> NlStatus {
    guard(|| unsafe {
        let eps = parse_unit(text(eps, "eps")?, "eps")?;
        put_box(out, make_correlated(n, &eps)?)
    })
}

/// The box whose outputs have parity `f(x)`.
///
/// # Safety
/// `f` must be a live function handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_full_correlation(f: *const NlAnf, out: *mut *mut NlBox) -> NlStatus {
    guard(|| unsafe { put_box(out, make_full_correlation(&borrow(f, "f")?.0)?) })
}

/// Parses a box from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_from_json(json: *const c_char, out: *mut *mut NlBox) -> NlStatus {
    guard(|| unsafe { put_box(out, box_from_json(text(json, "json")?)?) })
}

/// Serializes a box to JSON.
///
/// # Safety
/// `b` must be a live box handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_to_json(b: *const NlBox, out: *mut *mut c_char) -> NlStatus {
    guard(|| unsafe { put_string(out, box_to_json(&borrow(b, "box")?.0)) })
}

/// Releases a box. Null is ignored.
///
/// # Safety
/// `b` must be null or a box handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nl_box_free(b: *mut NlBox) {
    if !b.is_null() {
        drop(unsafe { Box::from_raw(b) });
    }
}

/// # Safety
/// `b` must be a live box handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_party_count(b: *const NlBox, out: *mut usize) -> NlStatus {
    guard(|| unsafe { put(out, borrow(b, "box")?.0.n()) })
}

/// `P(a|x)` as a rational string; bit `i-1` of `x` and `a` belongs to party `i`.
///
/// # Safety
/// `b` must be a live box handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_probability_str(b: *const NlBox, x: u32, a: u32, out: *mut *mut c_char) -> NlStatus {
    guard(|| unsafe {
        let p = &borrow(b, "box")?.0;
        let range = 1u32 << p.n();
        if x >= range || a >= range {
            return Err(Failure(
                NlStatus::InvalidArgument,
                format!("x={x} or a={a} out of range for {} parties", p.n()),
            ));
        }
        put_string(out, format_rational(p.prob(x, a)))
    })
}

/// # Safety
/// `b` must be a live box handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_is_non_signaling(b: *const NlBox, out: *mut bool) -> NlStatus {
    guard(|| unsafe { put(out, is_non_signaling(&borrow(b, "box")?.0)) })
}

/// Exact locality test; boxes with more than five parties fail with
/// `NL_STATUS_SIZE_LIMIT`.
///
/// # Safety
/// `b` must be a live box handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_is_local(b: *const NlBox, out: *mut bool) -> NlStatus {
    guard(|| unsafe { put(out, is_local(&borrow(b, "box")?.0)?.is_some()) })
}

/// Exact equality of two boxes.
///
/// # Safety
/// `p` and `q` must be live box handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_box_equal(p: *const NlBox, q: *const NlBox, out: *mut bool) -> NlStatus {
    guard(|| unsafe { put(out, borrow(p, "p")?.0 == borrow(q, "q")?.0) })
}

/// Wires two boxes with the triangle wiring, which maps two correlated
/// boxes with parameter `eps` to one with the distillation map applied.
///
/// # Safety
/// `p` and `q` must be live box handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_compose_triangle(p: *const NlBox, q: *const NlBox, out: *mut *mut NlBox) -> NlStatus {
    guard(|| unsafe { put_box(out, compose_triangle(&borrow(p, "p")?.0, &borrow(q, "q")?.0)?) })
}

/// Parses an expression such as `"x1*x2 + x3 + 1"` over `n` variables.
///
/// # Safety
/// `expr` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_anf_parse(expr: *const c_char, n: usize, out: *mut *mut NlAnf) -> NlStatus {
    guard(|| unsafe {
        let f = AnfFunction::parse(text(expr, "expr")?, n)?;
        put(out, Box::into_raw(Box::new(NlAnf(f))))
    })
}

/// Releases a function. Null is ignored.
///
/// # Safety
/// `f` must be null or a function handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nl_anf_free(f: *mut NlAnf) {
    if !f.is_null() {
        drop(unsafe { Box::from_raw(f) });
    }
}

/// `f(x)`, with bit `i-1` of `x` holding `x_i`.
///
/// # Safety
/// `f` must be a live function handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_anf_evaluate(f: *const NlAnf, x: u32, out: *mut bool) -> NlStatus {
    guard(|| unsafe {
        let f = &borrow(f, "f")?.0;
        if x >> f.n() != 0 {
            return Err(Failure(NlStatus::InvalidArgument, format!("x={x} out of range for {} variables", f.n())));
        }
        put(out, f.evaluate(x))
    })
}

/// Channels needed to simulate `P^f` from scratch.
///
/// # Safety
/// `f` must be a live function handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_anf_n_scratch(f: *const NlAnf, out: *mut usize) -> NlStatus {
    guard(|| unsafe { put(out, n_scratch(&borrow(f, "f")?.0)) })
}

/// Channel bound for simulating `P^f` with a distilled box; fails with
/// `NL_STATUS_PRECONDITION` unless the non-local support is one block.
///
/// # Safety
/// `f` must be a live function handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_anf_n_distill_bound(f: *const NlAnf, out: *mut usize) -> NlStatus {
    guard(|| unsafe { put(out, n_distill_bound(&borrow(f, "f")?.0)?) })
}

/// # Safety
/// `f` must be a live function handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_anf_amplifiable(f: *const NlAnf, out: *mut bool) -> NlStatus {
    guard(|| unsafe { put(out, amplifiable(&borrow(f, "f")?.0).is_amplifiable()) })
}

/// The full analysis report, as printed by `nonlocal analyze`.
///
/// # Safety
/// `f` must be a live function handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_anf_report(f: *const NlAnf, out: *mut *mut c_char) -> NlStatus {
    guard(|| unsafe { put_string(out, analyze(&borrow(f, "f")?.0)?.to_string()) })
}

/// One application of the n-party distillation map, as a rational string.
///
/// # Safety
/// `eps` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_t_map(n: usize, eps: *const c_char, out: *mut *mut c_char) -> NlStatus {
    guard(|| unsafe {
        let eps = parse_rational(text(eps, "eps")?)?;
        put_string(out, format_rational(&t_map(n, &eps)?))
    })
}

/// The distillation trajectory as CSV, as written by `nonlocal distill`.
///
/// # Safety
/// `eps` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_distill_csv(
    n: usize,
    eps: *const c_char,
    steps: usize,
    with_distance: bool,
    out: *mut *mut c_char,
) -> NlStatus {
    guard(|| unsafe {
        let eps = parse_unit(text(eps, "eps")?, "eps")?;
        put_string(out, iterate(n, &eps, steps)?.to_csv(with_distance))
    })
}
