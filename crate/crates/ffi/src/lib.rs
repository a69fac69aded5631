//! C ABI over `ssmlab`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`SsmStatus`]; on failure the message is available from
//! [`ssm_last_error`] on the same thread. Strings returned through out
//! parameters are released with [`ssm_string_free`].

use ssmlab::dissipative::{dissipative_koplienko_verify, dissipative_krein_verify};
use ssmlab::functions::ScalarFunction;
use ssmlab::generators::{gen, Instance, InstanceSpec};
use ssmlab::io::{from_json, to_json, write_measure_csv, FunctionDoc, PathDoc, ReportDoc};
use ssmlab::report::VerificationReport;
use ssmlab::ssm::{koplienko_verify, krein_ssm, krein_verify};
use ssmlab::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Precondition = 5,
    Numerical = 6,
    Unsupported = 7,
    Io = 8,
    Panic = 9,
}

impl From<&Error> for SsmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse(_) => Self::Parse,
            Error::Io(_) => Self::Io,
            Error::UnsupportedClass(_) | Error::WrongHalfPlane => Self::Unsupported,
            Error::EigenFailure(_) | Error::JointDiagonalization { .. } | Error::Singular | Error::CayleyPole { .. } => {
                Self::Numerical
            }
            Error::NotHermitian { .. }
            | Error::NotCommuting { .. }
            | Error::NotPathCommuting { .. }
            | Error::NotDissipative { .. }
            | Error::PathLeavesDissipative { .. }
            | Error::PoleOnSpectrum { .. }
            | Error::BoxTooSmall { .. } => Self::Precondition,
            _ => Self::InvalidInput,
        }
    }
}

/// Perturbation path, self-adjoint or dissipative.
pub struct SsmInstance(Instance);

/// Scalar test function.
pub struct SsmFunction(ScalarFunction);

/// Outcome of one identity check.
pub struct SsmReport(VerificationReport);

/// Flat view of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsmReportSummary {
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub bound_checks: usize,
    pub failed_bound_checks: usize,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Fail(SsmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(SsmStatus::from(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> SsmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SsmStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SsmStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SsmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SsmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(s).map_err(|_| Fail(SsmStatus::InvalidInput, "string contains NUL".into()))?.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ssm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn ssm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ssm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generates an instance from a JSON instance specification.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_instance_generate(spec_json: *const c_char, out: *mut *mut SsmInstance) -> SsmStatus {
    guard(|| {
        let spec: InstanceSpec = from_json(text(spec_json, "spec_json")?)?;
        emit(out, SsmInstance(gen(&spec)?))
    })
}

/// Builds an instance from a JSON document with `base` and `direction`
/// matrix tuples.
///
/// # Safety
/// `path_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_instance_from_json(path_json: *const c_char, out: *mut *mut SsmInstance) -> SsmStatus {
    guard(|| {
        let doc: PathDoc = from_json(text(path_json, "path_json")?)?;
        emit(out, SsmInstance(doc.to_instance()?))
    })
}

/// # Safety
/// `inst` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ssm_instance_free(inst: *mut SsmInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Matrix dimension, 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssm_instance_dim(inst: *const SsmInstance) -> usize {
    match inst.as_ref().map(|i| &i.0) {
        Some(Instance::Hermitian(p)) => p.dim(),
        Some(Instance::Dissipative(p)) => p.dim(),
        None => 0,
    }
}

/// Number of operators in the tuple, 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssm_instance_arity(inst: *const SsmInstance) -> usize {
    match inst.as_ref().map(|i| &i.0) {
        Some(Instance::Hermitian(p)) => p.arity(),
        Some(Instance::Dissipative(p)) => p.arity(),
        None => 0,
    }
}

/// True when the instance is a self-adjoint path.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssm_instance_is_self_adjoint(inst: *const SsmInstance) -> bool {
    matches!(inst.as_ref().map(|i| &i.0), Some(Instance::Hermitian(_)))
}

/// Parses a function document (`"class": "trig"` or `"rational"`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_function_from_json(json: *const c_char, out: *mut *mut SsmFunction) -> SsmStatus {
    guard(|| {
        let doc: FunctionDoc = from_json(text(json, "json")?)?;
        emit(out, SsmFunction(doc.to_function()?))
    })
}

/// # Safety
/// `f` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ssm_function_free(f: *mut SsmFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Evaluates `f` at a real point of length `n`.
///
/// # Safety
/// `x` must point to `n` doubles; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_function_eval(
    f: *const SsmFunction,
    x: *const f64,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> SsmStatus {
    guard(|| {
        let f = &borrow(f, "function")?.0;
        if x.is_null() || re.is_null() || im.is_null() {
            return Err(null("argument"));
        }
        if n != f.arity() {
            return Err(Error::ArityMismatch { expected: f.arity(), found: n }.into());
        }
        let z = f.checked_eval(std::slice::from_raw_parts(x, n))?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// First-order identity. Self-adjoint instances use the Krein measures
/// with `q` quadrature nodes; dissipative instances need a rational `f`
/// with poles in the lower half-plane.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_verify_krein(
    inst: *const SsmInstance,
    f: *const SsmFunction,
    q: usize,
    tol: f64,
    out: *mut *mut SsmReport,
) -> SsmStatus {
    guard(|| {
        let (inst, f) = (&borrow(inst, "instance")?.0, &borrow(f, "function")?.0);
        let r = match inst {
            Instance::Hermitian(p) => krein_verify(p, f, q, tol)?,
            Instance::Dissipative(p) => dissipative_krein_verify(p, f, q, tol)?,
        };
        emit(out, SsmReport(r))
    })
}

/// Second-order identity; `f` must be rational.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_verify_koplienko(
    inst: *const SsmInstance,
    f: *const SsmFunction,
    q: usize,
    tol: f64,
    out: *mut *mut SsmReport,
) -> SsmStatus {
    guard(|| {
        let (inst, f) = (&borrow(inst, "instance")?.0, &borrow(f, "function")?.0);
        let r = match inst {
            Instance::Hermitian(p) => koplienko_verify(p, f, q, tol)?,
            Instance::Dissipative(p) => dissipative_koplienko_verify(p, f, q, tol)?,
        };
        emit(out, SsmReport(r))
    })
}

/// First-order measure `j` (0-based) of a self-adjoint instance as CSV.
///
/// # Safety
/// `inst` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_krein_measure_csv(
    inst: *const SsmInstance,
    q: usize,
    j: usize,
    out: *mut *mut c_char,
) -> SsmStatus {
    guard(|| {
        let Instance::Hermitian(path) = &borrow(inst, "instance")?.0 else {
            return Err(Error::UnsupportedClass("dissipative".into()).into());
        };
        if j >= path.arity() {
            return Err(Error::IndexOutOfRange { index: j, arity: path.arity() }.into());
        }
        let measures = krein_ssm(path, q)?;
        let mut buf = Vec::new();
        write_measure_csv(&mut buf, &measures.quadrature[j])?;
        emit_string(out, String::from_utf8(buf).expect("CSV output is ASCII"))
    })
}

/// # Safety
/// `r` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ssm_report_free(r: *mut SsmReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_report_summary(r: *const SsmReport, out: *mut SsmReportSummary) -> SsmStatus {
    guard(|| {
        let r = &borrow(r, "report")?.0;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = SsmReportSummary {
            lhs_re: r.lhs.re,
            lhs_im: r.lhs.im,
            rhs_re: r.rhs.re,
            rhs_im: r.rhs.im,
            abs_residual: r.abs_residual,
            rel_residual: r.rel_residual,
            tolerance: r.tolerance,
            bound_checks: r.bound_checks.len(),
            failed_bound_checks: r.bound_checks.iter().filter(|c| c.asserted && !c.pass).count(),
            passed: r.passed(),
        };
        Ok(())
    })
}

/// Full report as JSON; release with [`ssm_string_free`].
///
/// # Safety
/// `r` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ssm_report_to_json(r: *const SsmReport, out: *mut *mut c_char) -> SsmStatus {
    guard(|| {
        let doc = ReportDoc::from_report(&borrow(r, "report")?.0);
        emit_string(out, to_json(&doc)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_arguments_are_reported() {
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { ssm_instance_generate(ptr::null(), &mut out) }, SsmStatus::NullPointer);
        assert!(out.is_null());
        let msg = unsafe { CStr::from_ptr(ssm_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "spec_json is null");
    }

    #[test]
    fn error_kinds_map_to_codes() {
        assert_eq!(SsmStatus::from(&Error::WrongHalfPlane), SsmStatus::Unsupported);
        assert_eq!(SsmStatus::from(&Error::NotCommuting { i: 0, j: 1, norm: 1.0 }), SsmStatus::Precondition);
        assert_eq!(SsmStatus::from(&Error::Parse("x".into())), SsmStatus::Parse);
    }
}
