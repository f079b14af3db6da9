use std::ffi::{c_char, CStr, CString};
use std::ptr;

use nonlocal_ffi::*;

fn owned(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { nl_string_free(s) };
    text
}

fn last_error() -> String {
    let p = nl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn new_box(status: NlStatus, b: *mut NlBox) -> *mut NlBox {
    assert_eq!(status, NlStatus::Ok, "{}", last_error());
    assert!(!b.is_null());
    b
}

fn correlated(n: usize, eps: &str) -> *mut NlBox {
    let eps = CString::new(eps).unwrap();
    let mut b = ptr::null_mut();
    new_box(unsafe { nl_box_correlated(n, eps.as_ptr(), &mut b) }, b)
}

#[test]
fn pr_box_probabilities_and_locality() {
    let mut b = ptr::null_mut();
    let b = new_box(unsafe { nl_box_npr(2, &mut b) }, b);
    let mut n = 0;
    assert_eq!(unsafe { nl_box_party_count(b, &mut n) }, NlStatus::Ok);
    assert_eq!(n, 2);

    let mut s = ptr::null_mut();
    // x = 11 forces odd parity, a = 01 is odd
    assert_eq!(unsafe { nl_box_probability_str(b, 0b11, 0b01, &mut s) }, NlStatus::Ok);
    assert_eq!(owned(s), "1/2");
    assert_eq!(unsafe { nl_box_probability_str(b, 0b11, 0b11, &mut s) }, NlStatus::Ok);
    assert_eq!(owned(s), "0/1");
    assert_eq!(unsafe { nl_box_probability_str(b, 4, 0, &mut s) }, NlStatus::InvalidArgument);

    let (mut ns, mut local) = (false, true);
    assert_eq!(unsafe { nl_box_is_non_signaling(b, &mut ns) }, NlStatus::Ok);
    assert_eq!(unsafe { nl_box_is_local(b, &mut local) }, NlStatus::Ok);
    assert!(ns && !local);

    let mut c = ptr::null_mut();
    let c = new_box(unsafe { nl_box_even_parity(2, &mut c) }, c);
    assert_eq!(unsafe { nl_box_is_local(c, &mut local) }, NlStatus::Ok);
    assert!(local);
    unsafe {
        nl_box_free(b);
        nl_box_free(c);
    }
}

#[test]
fn triangle_wiring_follows_the_map() {
    let p = correlated(3, "1/3");
    let mut wired = ptr::null_mut();
    let wired = new_box(unsafe { nl_compose_triangle(p, p, &mut wired) }, wired);

    let eps = CString::new("1/3").unwrap();
    let mut next = ptr::null_mut();
    assert_eq!(unsafe { nl_t_map(3, eps.as_ptr(), &mut next) }, NlStatus::Ok);
    let next = owned(next);
    // eps/4 * (5 - eps) at eps = 1/3
    assert_eq!(next, "7/18");
    let expected = correlated(3, &next);

    let mut same = false;
    assert_eq!(unsafe { nl_box_equal(wired, expected, &mut same) }, NlStatus::Ok);
    assert!(same);
    unsafe {
        nl_box_free(p);
        nl_box_free(wired);
        nl_box_free(expected);
    }
}

#[test]
fn json_round_trip() {
    let p = correlated(2, "3/4");
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { nl_box_to_json(p, &mut json) }, NlStatus::Ok);
    let json = CString::new(owned(json)).unwrap();
    let mut q = ptr::null_mut();
    let q = new_box(unsafe { nl_box_from_json(json.as_ptr(), &mut q) }, q);
    let mut same = false;
    assert_eq!(unsafe { nl_box_equal(p, q, &mut same) }, NlStatus::Ok);
    assert!(same);

    let bad = CString::new(r#"{"n":1,"records":[]}"#).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { nl_box_from_json(bad.as_ptr(), &mut r) }, NlStatus::Format);
    assert!(r.is_null());
    unsafe {
        nl_box_free(p);
        nl_box_free(q);
    }
}

#[test]
fn function_analysis() {
    let expr = CString::new("x1*x2*x3 + x3*x4 + x1").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { nl_anf_parse(expr.as_ptr(), 4, &mut f) }, NlStatus::Ok);

    let (mut scratch, mut bound, mut amp, mut value) = (0, 0, false, true);
    assert_eq!(unsafe { nl_anf_n_scratch(f, &mut scratch) }, NlStatus::Ok);
    assert_eq!(unsafe { nl_anf_n_distill_bound(f, &mut bound) }, NlStatus::Ok);
    assert_eq!(unsafe { nl_anf_amplifiable(f, &mut amp) }, NlStatus::Ok);
    assert_eq!((scratch, bound, amp), (3, 1, true));
    // x = (1,1,1,0): 1 + 0 + 1
    assert_eq!(unsafe { nl_anf_evaluate(f, 0b0111, &mut value) }, NlStatus::Ok);
    assert!(!value);

    let mut report = ptr::null_mut();
    assert_eq!(unsafe { nl_anf_report(f, &mut report) }, NlStatus::Ok);
    assert!(owned(report).lines().any(|l| l == "G': {(4,3)}"));

    let mut pf = ptr::null_mut();
    let pf = new_box(unsafe { nl_box_full_correlation(f, &mut pf) }, pf);
    let mut n = 0;
    assert_eq!(unsafe { nl_box_party_count(pf, &mut n) }, NlStatus::Ok);
    assert_eq!(n, 4);
    unsafe {
        nl_box_free(pf);
        nl_anf_free(f);
    }

    let two_blocks = CString::new("x1*x2 + x3*x4").unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { nl_anf_parse(two_blocks.as_ptr(), 4, &mut g) }, NlStatus::Ok);
    assert_eq!(unsafe { nl_anf_n_distill_bound(g, &mut bound) }, NlStatus::Precondition);
    unsafe { nl_anf_free(g) };
}

#[test]
fn distillation_csv() {
    let eps = CString::new("1/2").unwrap();
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { nl_distill_csv(2, eps.as_ptr(), 2, false, &mut csv) }, NlStatus::Ok);
    let csv = owned(csv);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "step,eps_num,eps_den,eps_decimal,copies");
    assert!(rows[2].starts_with("1,5,8,"));
}

#[test]
fn errors_are_reported_per_thread() {
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { nl_box_npr(0, &mut b) }, NlStatus::InvalidArgument);
    assert!(b.is_null());
    assert!(last_error().contains("party count"));

    let syntax = CString::new("x1 * (x2").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { nl_anf_parse(syntax.as_ptr(), 2, &mut f) }, NlStatus::InvalidArgument);
    assert!(last_error().contains("position"));

    let eps = CString::new("3/2").unwrap();
    assert_eq!(unsafe { nl_box_correlated(2, eps.as_ptr(), &mut b) }, NlStatus::InvalidArgument);
    assert_eq!(unsafe { nl_box_correlated(2, ptr::null(), &mut b) }, NlStatus::NullPointer);
    assert_eq!(unsafe { nl_box_npr(2, ptr::null_mut()) }, NlStatus::NullPointer);

    let bad_utf8 = [0xffu8, 0];
    assert_eq!(unsafe { nl_box_correlated(2, bad_utf8.as_ptr().cast(), &mut b) }, NlStatus::InvalidUtf8);

    std::thread::spawn(|| assert!(nl_last_error_message().is_null())).join().unwrap();
    unsafe {
        nl_box_free(ptr::null_mut());
        nl_anf_free(ptr::null_mut());
        nl_string_free(ptr::null_mut());
    }
}

#[test]
fn oversized_locality_is_a_size_limit() {
    let mut b = ptr::null_mut();
    let b = new_box(unsafe { nl_box_npr(6, &mut b) }, b);
    let mut local = false;
    assert_eq!(unsafe { nl_box_is_local(b, &mut local) }, NlStatus::SizeLimit);
    unsafe { nl_box_free(b) };
}
