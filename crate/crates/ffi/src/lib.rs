//! C ABI over the noon-diffusion library.
//!
//! Every function returns an [`NdStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and can be read
//! with [`nd_last_error`]. Handles are opaque and must be released with
//! their `_free` function. Strings returned by the library are released
//! with [`nd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use noon_diffusion::cli::{simulate, CliErrorKind, ExperimentDescriptor};
use noon_diffusion::diffusion::stejskal_tanner;
use noon_diffusion::estimator::{
    fit_diffusion, stokes_einstein, AttenuationCurve, CurvePoint, FitMethod, FitOptions, StokesEinsteinInput,
};
use noon_diffusion::spin::{Nuclide, Representation, SpinSystemSpec};
use noon_diffusion::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: bad UTF-8, schema violations, unknown enum values.
    InvalidInput = 2,
    /// A physics guard rejected the request (Δ < δ, repeated G, ...).
    Physics = 3,
    /// The curve shows no resolvable attenuation.
    Degenerate = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdRepresentation {
    DickeSubspace = 0,
    FullTensor = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdFitMethod {
    LogLinear = 0,
    NonlinearLs = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NdFitResult {
    /// m² s^-1.
    pub d_fit: f64,
    pub d_sigma: f64,
    pub s0_fit: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    pub degenerate: bool,
}

/// Opaque spin system.
pub struct NdSpinSystem(SpinSystemSpec);

/// Opaque attenuation curve under construction.
pub struct NdCurve(AttenuationCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: NdStatus, msg: impl Into<String>) -> NdStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> NdStatus {
    let status = match err {
        Error::DegenerateCurve(_) => NdStatus::Degenerate,
        _ => NdStatus::Physics,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> NdStatus) -> NdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(NdStatus::Panic, "internal panic"),
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a spin system of one control and `n_total - 1` targets.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nd_spin_system_new(
    control_gamma: f64,
    target_gamma: f64,
    n_total: usize,
    j_coupling_hz: f64,
    representation: NdRepresentation,
    out: *mut *mut NdSpinSystem,
) -> NdStatus {
    guard(|| {
        if out.is_null() {
            return fail(NdStatus::NullPointer, "out is null");
        }
        let rep = match representation {
            NdRepresentation::DickeSubspace => Representation::DickeSubspace,
            NdRepresentation::FullTensor => Representation::FullTensor,
        };
        let spec = Nuclide::new("control", control_gamma)
            .and_then(|c| Ok((c, Nuclide::new("target", target_gamma)?)))
            .and_then(|(c, t)| SpinSystemSpec::new(c, t, n_total, j_coupling_hz, rep));
        match spec {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(NdSpinSystem(spec)));
                NdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// γ_A + (N-1)·γ_M of the system.
///
/// # Safety
/// `system` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nd_spin_system_gamma_eff(system: *const NdSpinSystem, out: *mut f64) -> NdStatus {
    guard(|| {
        if system.is_null() || out.is_null() {
            return fail(NdStatus::NullPointer, "null argument");
        }
        *out = (*system).0.gamma_eff();
        NdStatus::Ok
    })
}

/// # Safety
/// `system` must be null or a handle from [`nd_spin_system_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_spin_system_free(system: *mut NdSpinSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Starts an empty curve for the given echo timing and gradient-weighted
/// order (rad s^-1 T^-1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_curve_new(
    little_delta_s: f64,
    big_delta_s: f64,
    q_gamma: f64,
    out: *mut *mut NdCurve,
) -> NdStatus {
    guard(|| {
        if out.is_null() {
            return fail(NdStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(NdCurve(AttenuationCurve {
            points: Vec::new(),
            little_delta: little_delta_s,
            big_delta: big_delta_s,
            q_gamma,
        })));
        NdStatus::Ok
    })
}

/// Appends a point; pass NaN as `sigma` when there is no standard error.
///
/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_curve_push(curve: *mut NdCurve, g: f64, s: f64, sigma: f64) -> NdStatus {
    guard(|| {
        if curve.is_null() {
            return fail(NdStatus::NullPointer, "curve is null");
        }
        (*curve).0.points.push(CurvePoint {
            g,
            s,
            sigma: (!sigma.is_nan()).then_some(sigma),
        });
        NdStatus::Ok
    })
}

/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_curve_len(curve: *const NdCurve) -> usize {
    if curve.is_null() {
        0
    } else {
        (*curve).0.len()
    }
}

/// # Safety
/// `curve` must be null or a handle from [`nd_curve_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_curve_free(curve: *mut NdCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Fits S = S₀ exp(-bD). A degenerate curve still fills `out` and returns
/// `ND_STATUS_DEGENERATE`.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nd_fit_diffusion(
    curve: *const NdCurve,
    method: NdFitMethod,
    bootstrap_samples: usize,
    seed: u64,
    out: *mut NdFitResult,
) -> NdStatus {
    guard(|| {
        if curve.is_null() || out.is_null() {
            return fail(NdStatus::NullPointer, "null argument");
        }
        let options = FitOptions {
            method: match method {
                NdFitMethod::LogLinear => FitMethod::LogLinear,
                NdFitMethod::NonlinearLs => FitMethod::NonlinearLs,
            },
            bootstrap_samples,
            seed,
        };
        match fit_diffusion(&(*curve).0, &options) {
            Ok(f) => {
                *out = NdFitResult {
                    d_fit: f.d_fit,
                    d_sigma: f.d_sigma,
                    s0_fit: f.s0_fit,
                    residual_rms: f.residual_rms,
                    iterations: f.iterations,
                    degenerate: f.degenerate,
                };
                if f.degenerate {
                    fail(NdStatus::Degenerate, "the curve shows no resolvable attenuation")
                } else {
                    NdStatus::Ok
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// exp(-(qGδ)² D (Δ - δ/3)).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_stejskal_tanner(
    g: f64,
    little_delta_s: f64,
    big_delta_s: f64,
    d: f64,
    q_gamma: f64,
    out: *mut f64,
) -> NdStatus {
    guard(|| {
        if out.is_null() {
            return fail(NdStatus::NullPointer, "out is null");
        }
        match stejskal_tanner(g, little_delta_s, big_delta_s, d, q_gamma) {
            Ok(s) => {
                *out = s;
                NdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// kT / (6πηr) in m² s^-1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_stokes_einstein(
    temperature_k: f64,
    viscosity_pa_s: f64,
    radius_m: f64,
    out: *mut f64,
) -> NdStatus {
    guard(|| {
        if out.is_null() {
            return fail(NdStatus::NullPointer, "out is null");
        }
        match stokes_einstein(&StokesEinsteinInput::new(temperature_k, viscosity_pa_s, radius_m)) {
            Ok(d) => {
                *out = d;
                NdStatus::Ok
            }
            Err(e) => fail(NdStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Runs a descriptor (JSON text) and returns the run report as JSON. The
/// descriptor must carry its seed.
///
/// # Safety
/// `descriptor_json` must be a NUL-terminated string and `out` writable.
/// The returned string is released with [`nd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nd_simulate_json(descriptor_json: *const c_char, out: *mut *mut c_char) -> NdStatus {
    guard(|| {
        if descriptor_json.is_null() || out.is_null() {
            return fail(NdStatus::NullPointer, "null argument");
        }
        let text = match CStr::from_ptr(descriptor_json).to_str() {
            Ok(t) => t,
            Err(e) => return fail(NdStatus::InvalidInput, format!("descriptor is not UTF-8: {e}")),
        };
        let result = ExperimentDescriptor::parse(text).and_then(|d| simulate(&d, None, None));
        match result {
            Ok(report) => {
                let json = serde_json::to_string(&report).expect("report serialises");
                *out = CString::new(json).expect("JSON has no NUL").into_raw();
                NdStatus::Ok
            }
            Err(e) => {
                let status = match e.kind {
                    CliErrorKind::Input => NdStatus::InvalidInput,
                    CliErrorKind::Degenerate => NdStatus::Degenerate,
                    CliErrorKind::Physics => NdStatus::Physics,
                };
                fail(status, e.message)
            }
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
