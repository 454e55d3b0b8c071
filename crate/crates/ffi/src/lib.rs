//! C ABI over `wigner-flow`.
//!
//! Objects are opaque handles created by `wf_*_new`-style constructors and
//! released by the matching `wf_*_free`. Every fallible call returns a
//! [`WfStatus`]; on failure [`wf_last_error_message`] describes the error on
//! the calling thread. Results are written through out-pointers, which are
//! left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wigner_flow::gaussian::GaussianEnsemble;
use wigner_flow::models::{self, SeparableModel};
use wigner_flow::oracle::{self, VerifyConfig};
use wigner_flow::orbit::{classify_harper, Branch};
use wigner_flow::series::TruncationPolicy;
use wigner_flow::special;
use wigner_flow::td::TdEnsemble;
use wigner_flow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    VelocityUndefined = 4,
    CorrectionRegimeExceeded = 5,
    ModelMismatch = 6,
    Io = 7,
    VerifyFailed = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfBranch {
    ClosedPositive = 0,
    ClosedNegative = 1,
    Open = 2,
    Empty = 3,
    Threshold = 4,
}

impl From<Branch> for WfBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::ClosedPositive => WfBranch::ClosedPositive,
            Branch::ClosedNegative => WfBranch::ClosedNegative,
            Branch::Open => WfBranch::Open,
            Branch::Empty => WfBranch::Empty,
            Branch::Threshold => WfBranch::Threshold,
        }
    }
}

pub struct WfModel {
    inner: SeparableModel,
}

pub struct WfGaussian {
    inner: GaussianEnsemble,
}

pub struct WfThermal {
    inner: TdEnsemble,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WfStatus {
    match e {
        Error::InvalidParameter { .. }
        | Error::InvalidGrid(_)
        | Error::UnsupportedOrder { .. }
        | Error::AxisTooShort { .. }
        | Error::OpenPolyline(_)
        | Error::InsufficientOrder { .. } => WfStatus::InvalidArgument,
        Error::OutOfRange { .. } | Error::WindowOutsideGrid { .. } | Error::PointOutsideGrid { .. } => WfStatus::OutOfRange,
        Error::VelocityUndefined { .. } => WfStatus::VelocityUndefined,
        Error::CorrectionRegimeExceeded { .. } | Error::NonPositivePartition { .. } => WfStatus::CorrectionRegimeExceeded,
        Error::ModelMismatch { .. } | Error::NoHermiteReduction(_) => WfStatus::ModelMismatch,
        Error::Io(_) | Error::Json(_) | Error::Format(_) => WfStatus::Io,
        Error::NonFinite { .. } => WfStatus::Internal,
    }
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<WfStatus, Error>) -> WfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            WfStatus::Panic
        }
    }
}

fn null_error(what: &str) -> WfStatus {
    set_last_error(format!("{what} is null"));
    WfStatus::NullPointer
}

macro_rules! deref {
    ($p:expr, $what:literal) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return null_error($what),
        }
    };
}

macro_rules! out {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return null_error(stringify!($p));
        })+
    };
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn wf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- special functions ----

/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn wf_bessel_i(order: u32, x: f64, out: *mut f64) -> WfStatus {
    out!(out);
    guard(|| {
        *out = special::bessel_i(order, x)?;
        Ok(WfStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn wf_erf(x: f64) -> f64 {
    special::erf(x)
}

#[no_mangle]
pub extern "C" fn wf_erfc(x: f64) -> f64 {
    special::erfc(x)
}

#[no_mangle]
pub extern "C" fn wf_erfcx(x: f64) -> f64 {
    special::erfcx(x)
}

/// Physicists' Hermite polynomial `H_n(z)`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn wf_hermite(n: u32, z: f64, out: *mut f64) -> WfStatus {
    out!(out);
    guard(|| {
        *out = special::hermite(n as usize, z)?;
        Ok(WfStatus::Ok)
    })
}

// ---- models ----

fn boxed_model(m: wigner_flow::Result<SeparableModel>, out: *mut *mut WfModel) -> WfStatus {
    guard(|| {
        let b = Box::new(WfModel { inner: m? });
        unsafe { *out = Box::into_raw(b) };
        Ok(WfStatus::Ok)
    })
}

/// `cos k + ν² cos x`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_model_harper(nu2: f64, out: *mut *mut WfModel) -> WfStatus {
    out!(out);
    boxed_model(models::harper_model(nu2), out)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_model_harmonic(out: *mut *mut WfModel) -> WfStatus {
    out!(out);
    boxed_model(Ok(models::harmonic_model()), out)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_model_lotka_volterra(out: *mut *mut WfModel) -> WfStatus {
    out!(out);
    boxed_model(Ok(models::lotka_volterra_model()), out)
}

/// # Safety
/// `model` must come from a `wf_model_*` constructor (or be null).
#[no_mangle]
pub unsafe extern "C" fn wf_model_free(model: *mut WfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_model_energy(model: *const WfModel, x: f64, k: f64, out: *mut f64) -> WfStatus {
    let m = deref!(model, "model");
    out!(out);
    guard(|| {
        *out = m.inner.energy(x, k);
        Ok(WfStatus::Ok)
    })
}

/// Orbit class of the Harper level set at `energy`.
#[no_mangle]
pub extern "C" fn wf_classify_harper(nu2: f64, energy: f64) -> WfBranch {
    classify_harper(nu2, energy).into()
}

// ---- Gaussian ensemble ----

/// Gaussian ensemble of width `gamma` for `model` (copied).
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_new(gamma: f64, model: *const WfModel, out: *mut *mut WfGaussian) -> WfStatus {
    let m = deref!(model, "model");
    out!(out);
    guard(|| {
        let g = GaussianEnsemble::new(gamma, m.inner.clone())?;
        *out = Box::into_raw(Box::new(WfGaussian { inner: g }));
        Ok(WfStatus::Ok)
    })
}

/// # Safety
/// `g` must come from [`wf_gaussian_new`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_free(g: *mut WfGaussian) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Closed-form `(∂_x J_x, ∂_k J_k)`.
///
/// # Safety
/// `g` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_div_closed(g: *const WfGaussian, x: f64, k: f64, dx: *mut f64, dk: *mut f64) -> WfStatus {
    let g = deref!(g, "gaussian");
    out!(dx, dk);
    guard(|| {
        (*dx, *dk) = g.inner.div_closed_generic(x, k)?;
        Ok(WfStatus::Ok)
    })
}

/// Hermite-series `(∂_x J_x, ∂_k J_k)` through `eta_max`.
///
/// # Safety
/// `g` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_div_series(
    g: *const WfGaussian,
    x: f64,
    k: f64,
    eta_max: u32,
    dx: *mut f64,
    dk: *mut f64,
) -> WfStatus {
    let g = deref!(g, "gaussian");
    out!(dx, dk);
    guard(|| {
        let policy = TruncationPolicy::fixed(eta_max)?;
        (*dx, *dk) = g.inner.div_series(x, k, &policy)?;
        Ok(WfStatus::Ok)
    })
}

/// Harper erf currents.
///
/// # Safety
/// `g` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_currents(g: *const WfGaussian, x: f64, k: f64, jx: *mut f64, jk: *mut f64) -> WfStatus {
    let g = deref!(g, "gaussian");
    out!(jx, jk);
    guard(|| {
        (*jx, *jk) = g.inner.currents_erf(x, k)?;
        Ok(WfStatus::Ok)
    })
}

/// Harper quantum velocity `J / G`.
///
/// # Safety
/// `g` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_velocity(g: *const WfGaussian, x: f64, k: f64, wx: *mut f64, wk: *mut f64) -> WfStatus {
    let g = deref!(g, "gaussian");
    out!(wx, wk);
    guard(|| {
        (*wx, *wk) = g.inner.velocity_field(x, k)?;
        Ok(WfStatus::Ok)
    })
}

/// Harper `∇·w`.
///
/// # Safety
/// `g` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_div_w(g: *const WfGaussian, x: f64, k: f64, out: *mut f64) -> WfStatus {
    let g = deref!(g, "gaussian");
    out!(out);
    guard(|| {
        *out = g.inner.gaussian_div_w(x, k)?;
        Ok(WfStatus::Ok)
    })
}

// ---- thermal ensemble ----

/// Thermal ensemble at inverse temperature `beta` for `model` (copied).
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_thermal_new(model: *const WfModel, beta: f64, out: *mut *mut WfThermal) -> WfStatus {
    let m = deref!(model, "model");
    out!(out);
    guard(|| {
        let t = TdEnsemble::new(m.inner.clone(), beta)?;
        *out = Box::into_raw(Box::new(WfThermal { inner: t }));
        Ok(WfStatus::Ok)
    })
}

/// # Safety
/// `t` must come from [`wf_thermal_new`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn wf_thermal_free(t: *mut WfThermal) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Classical and second-order partition functions.
///
/// # Safety
/// `t` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn wf_thermal_partition(t: *const WfThermal, z_classical: *mut f64, z_corrected: *mut f64) -> WfStatus {
    let t = deref!(t, "thermal");
    out!(z_classical, z_corrected);
    guard(|| {
        let zq = t.inner.z_corrected()?;
        *z_classical = t.inner.z_classical();
        *z_corrected = zq;
        Ok(WfStatus::Ok)
    })
}

/// `W₀` and `W_St` at a point.
///
/// # Safety
/// `t` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn wf_thermal_wigner(t: *const WfThermal, x: f64, k: f64, w0: *mut f64, w_st2: *mut f64) -> WfStatus {
    let t = deref!(t, "thermal");
    out!(w0, w_st2);
    guard(|| {
        let w = t.inner.w_st2(x, k)?;
        *w0 = t.inner.w0(x, k);
        *w_st2 = w;
        Ok(WfStatus::Ok)
    })
}

/// Second-order currents.
///
/// # Safety
/// `t` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn wf_thermal_currents(t: *const WfThermal, x: f64, k: f64, jx: *mut f64, jk: *mut f64) -> WfStatus {
    let t = deref!(t, "thermal");
    out!(jx, jk);
    guard(|| {
        (*jx, *jk) = t.inner.corrected_currents(x, k)?;
        Ok(WfStatus::Ok)
    })
}

/// Second-order `∇·w`.
///
/// # Safety
/// `t` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn wf_thermal_div_w(t: *const WfThermal, x: f64, k: f64, out: *mut f64) -> WfStatus {
    let t = deref!(t, "thermal");
    out!(out);
    guard(|| {
        *out = t.inner.td_div_w(x, k);
        Ok(WfStatus::Ok)
    })
}

// ---- verification ----

/// Runs the full oracle suite and hands back the JSON report, to be released
/// with [`wf_string_free`]. Returns `VerifyFailed` (with the report still
/// written) when any check fails.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_verify_json(out: *mut *mut c_char) -> WfStatus {
    out!(out);
    guard(|| {
        let report = oracle::run_all(&VerifyConfig::default())?;
        let json = serde_json::to_string(&report)?;
        *out = CString::new(json).map_err(|e| Error::Format(e.to_string()))?.into_raw();
        Ok(if report.passed { WfStatus::Ok } else { WfStatus::VerifyFailed })
    })
}

/// Looks a built-in model up by name (`harper`, `harmonic`,
/// `lotka-volterra`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_model_by_name(name: *const c_char, nu2: f64, out: *mut *mut WfModel) -> WfStatus {
    if name.is_null() {
        return null_error("name");
    }
    out!(out);
    let name = match CStr::from_ptr(name).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_last_error("model name is not UTF-8".into());
            return WfStatus::InvalidArgument;
        }
    };
    boxed_model(models::model_by_name(name, nu2), out)
}
