//! C interface. Specs are opaque handles; points, elements and rationals cross the boundary
//! as strings in the library's text formats. Every call returns a [`CbStatus`]; on failure
//! [`cb_last_error_message`] describes the error. Strings returned through `out` pointers are
//! owned by the caller and released with [`cb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cat0_boundary::action::{orbit_limit, ActionSpec};
use cat0_boundary::boundary_map::{phibar, MapSetup};
use cat0_boundary::error::Error;
use cat0_boundary::rational::{fmt_rational, parse_rational};
use cat0_boundary::space::{BoundaryPoint, SpacePoint};
use cat0_boundary::star::{check_condition_star, minimal_m_on_ball};
use cat0_boundary::tree::{tree_dist, TreePoint};
use cat0_boundary::word::GroupElement;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    EmptyPeriod = 4,
    OutOfRange = 5,
    NoLimit = 6,
    UnsupportedSpec = 7,
    InvalidConstants = 8,
    NotConvergent = 9,
    NotCauchy = 10,
    NoCover = 11,
    CrosscheckMismatch = 12,
    ProbeFailure = 13,
    Config = 14,
    Io = 15,
    Panic = 16,
}

/// An action of F2 x Z on T x R.
pub struct CbSpec(ActionSpec);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CbStatus {
    match e {
        Error::Parse(_) => CbStatus::Parse,
        Error::EmptyPeriod => CbStatus::EmptyPeriod,
        Error::OutOfRange { .. } => CbStatus::OutOfRange,
        Error::NoLimit => CbStatus::NoLimit,
        Error::UnsupportedSpec(_) => CbStatus::UnsupportedSpec,
        Error::InvalidConstants(_) => CbStatus::InvalidConstants,
        Error::NotConvergent { .. } => CbStatus::NotConvergent,
        Error::NotCauchy { .. } => CbStatus::NotCauchy,
        Error::NoCover { .. } => CbStatus::NoCover,
        Error::CrosscheckMismatch { .. } => CbStatus::CrosscheckMismatch,
        Error::ProbeFailure(_) => CbStatus::ProbeFailure,
        Error::Config(_) => CbStatus::Config,
        Error::Io(_) => CbStatus::Io,
    }
}

enum Fail {
    Status(CbStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CbStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            CbStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(CbStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Status(CbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn spec_ref<'a>(p: *const CbSpec, what: &str) -> Result<&'a ActionSpec, Fail> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| Fail::Status(CbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Status(CbStatus::NullPointer, "out is null".into()));
    }
    let c = CString::new(s).map_err(|_| Fail::Status(CbStatus::Parse, "result contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_spec(out: *mut *mut CbSpec, s: ActionSpec) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Status(CbStatus::NullPointer, "out is null".into()));
    }
    *out = Box::into_raw(Box::new(CbSpec(s)));
    Ok(())
}

/// A preset action: `dot`, `star` or `scaled2`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cb_spec_preset(name: *const c_char, out: *mut *mut CbSpec) -> CbStatus {
    guard(|| {
        let name = text(name, "name")?;
        let s = ActionSpec::preset(name).ok_or_else(|| Fail::Lib(Error::Config(format!("unknown preset {name:?}"))))?;
        put_spec(out, s)
    })
}

/// The action with `psi(a) = weight_a`, `psi(b) = weight_b` and central shift `z_shift`,
/// each a rational such as `"1/2"`.
///
/// # Safety
/// All strings must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cb_spec_new(
    weight_a: *const c_char,
    weight_b: *const c_char,
    z_shift: *const c_char,
    out: *mut *mut CbSpec,
) -> CbStatus {
    guard(|| {
        let wa = parse_rational(text(weight_a, "weight_a")?)?;
        let wb = parse_rational(text(weight_b, "weight_b")?)?;
        let zs = parse_rational(text(z_shift, "z_shift")?)?;
        put_spec(out, ActionSpec::new(wa, wb, zs)?)
    })
}

/// # Safety
/// `spec` must come from `cb_spec_preset` or `cb_spec_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cb_spec_free(spec: *mut CbSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// The boundary limit of `g^n x0`, for `g` written as `"word:z"`.
///
/// # Safety
/// `spec` must be a live handle, `element` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cb_orbit_limit(spec: *const CbSpec, element: *const c_char, out: *mut *mut c_char) -> CbStatus {
    guard(|| {
        let s = spec_ref(spec, "spec")?;
        let g = GroupElement::parse(text(element, "element")?)?;
        put_string(out, orbit_limit(s, &g, &SpacePoint::origin())?.to_string())
    })
}

/// Condition (*) on `ball(l)` with radii `n`, `m`. Writes the verdict to `holds` and, when
/// `out_json` is not null, the full verdict as JSON.
///
/// # Safety
/// Handles must be live, strings NUL-terminated, `holds` valid; `out_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn cb_check_star(
    spec_x: *const CbSpec,
    spec_y: *const CbSpec,
    n: *const c_char,
    m: *const c_char,
    l: u32,
    holds: *mut bool,
    out_json: *mut *mut c_char,
) -> CbStatus {
    guard(|| {
        let (sx, sy) = (spec_ref(spec_x, "spec_x")?, spec_ref(spec_y, "spec_y")?);
        let n = parse_rational(text(n, "n")?)?;
        let m = parse_rational(text(m, "m")?)?;
        if holds.is_null() {
            return Err(Fail::Status(CbStatus::NullPointer, "holds is null".into()));
        }
        let o = SpacePoint::origin();
        let v = check_condition_star(sx, sy, n, m, l, &o, &o)?;
        *holds = v.holds_on_ball;
        if !out_json.is_null() {
            put_string(out_json, serde_json::to_string(&v).map_err(|e| Fail::Lib(Error::Io(e.to_string())))?)?;
        }
        Ok(())
    })
}

/// The square of the smallest `M` for which (*) holds on `ball(l)`, as `"p/q"`.
///
/// # Safety
/// Handles must be live, `n` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cb_minimal_m_sq(
    spec_x: *const CbSpec,
    spec_y: *const CbSpec,
    n: *const c_char,
    l: u32,
    out: *mut *mut c_char,
) -> CbStatus {
    guard(|| {
        let (sx, sy) = (spec_ref(spec_x, "spec_x")?, spec_ref(spec_y, "spec_y")?);
        let n = parse_rational(text(n, "n")?)?;
        let o = SpacePoint::origin();
        put_string(out, fmt_rational(&minimal_m_on_ball(sx, sy, n, l, &o, &o)?))
    })
}

/// The boundary map at `alpha` (for example `"[a^inf,0/1]"`), approximating with radius `n`
/// and at least `k` sequence terms.
///
/// # Safety
/// Handles must be live, strings NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cb_phibar(
    spec_x: *const CbSpec,
    spec_y: *const CbSpec,
    n: *const c_char,
    alpha: *const c_char,
    k: u32,
    out: *mut *mut c_char,
) -> CbStatus {
    guard(|| {
        let (sx, sy) = (spec_ref(spec_x, "spec_x")?, spec_ref(spec_y, "spec_y")?);
        let n = parse_rational(text(n, "n")?)?;
        let alpha = BoundaryPoint::parse(text(alpha, "alpha")?)?;
        let mut setup = MapSetup::new(sx.clone(), sy.clone(), n);
        setup.k = k as usize;
        put_string(out, phibar(&alpha, &setup)?.output.to_string())
    })
}

/// Exact tree distance between two tree points, as `"p/q"`.
///
/// # Safety
/// Strings must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cb_tree_dist(p: *const c_char, q: *const c_char, out: *mut *mut c_char) -> CbStatus {
    guard(|| {
        let p = TreePoint::parse(text(p, "p")?)?;
        let q = TreePoint::parse(text(q, "q")?)?;
        put_string(out, fmt_rational(&tree_dist(&p, &q)))
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread; empty after a success. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn cb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
