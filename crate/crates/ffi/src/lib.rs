//! C interface to `decay-core`.
//!
//! Models are opaque handles created by `decay_*_new` and released by the
//! matching `decay_*_free`. Every fallible call returns a [`DecayStatus`];
//! on failure `decay_last_error_message` describes the error on the calling
//! thread. Panics never cross the boundary: they are reported as
//! `DECAY_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use decay_core::histories::{decompose_nonescape, decompose_survival, AmplitudeSource, HistoryDecomposition};
use decay_core::{Complex64, DecayError, DeltaShellSystem, DetectorSystem, ResonancePole};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Range = 3,
    SearchFailure = 4,
    Convergence = 5,
    Configuration = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for DecayComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// One `(T, t)` history decomposition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayHistory {
    pub final_time: f64,
    pub t: f64,
    pub pp: f64,
    pub interference: f64,
    pub qq: f64,
    pub total: f64,
}

impl From<HistoryDecomposition> for DecayHistory {
    fn from(d: HistoryDecomposition) -> Self {
        Self { final_time: d.final_time, t: d.t, pp: d.pp, interference: d.pq_plus_qp, qq: d.qq, total: d.total }
    }
}

/// Delta-shell model handle.
pub struct DecayDeltaShell(DeltaShellSystem);
/// Absorbing-detector model handle.
pub struct DecayDetector(DetectorSystem);
/// Single-resonance model handle.
pub struct DecayResonance(ResonancePole);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(DecayError),
}

impl From<DecayError> for Failure {
    fn from(e: DecayError) -> Self {
        Self::Core(e)
    }
}

fn status_of(e: &DecayError) -> DecayStatus {
    match e {
        DecayError::Domain(_) => DecayStatus::Domain,
        DecayError::Range(_) => DecayStatus::Range,
        DecayError::SearchFailure { .. } => DecayStatus::SearchFailure,
        DecayError::Convergence(_) => DecayStatus::Convergence,
        DecayError::Configuration(_) => DecayStatus::Configuration,
        DecayError::Io(_) => DecayStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DecayStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DecayStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed as {name}"));
            DecayStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            DecayStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, name: &'static str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `p` is null or a live handle from the matching constructor.
unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null("handle"))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn decay_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn decay_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_faddeeva(re: f64, im: f64, out: *mut DecayComplex) -> DecayStatus {
    guard(|| write_out(out, "out", decay_core::complexfn::faddeeva(Complex64::new(re, im))?.into()))
}

// Delta-shell model.

/// # Safety
/// `out` must be valid for writes. The handle written there must be released
/// with `decay_delta_shell_free`.
#[no_mangle]
pub unsafe extern "C" fn decay_delta_shell_new(eta: f64, out: *mut *mut DecayDeltaShell) -> DecayStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let sys = DeltaShellSystem::new(eta)?;
        out.write(Box::into_raw(Box::new(DecayDeltaShell(sys))));
        Ok(())
    })
}

/// # Safety
/// `h` is NULL or a handle from `decay_delta_shell_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn decay_delta_shell_free(h: *mut DecayDeltaShell) {
    if !h.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(h))));
    }
}

/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_delta_shell_survival_amplitude(h: *const DecayDeltaShell, t: f64, out: *mut DecayComplex) -> DecayStatus {
    guard(|| write_out(out, "out", handle(h)?.0.survival_amplitude(t)?.into()))
}

/// Probability of remaining in `[0, 1]` at time `t`.
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_delta_shell_nonescape_probability(h: *const DecayDeltaShell, t: f64, out: *mut f64) -> DecayStatus {
    guard(|| write_out(out, "out", handle(h)?.0.nonescape_probability(t)?))
}

/// The `n`-th resonance pole (`n >= 1`, ordered by real part).
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_delta_shell_resonance_pole(h: *const DecayDeltaShell, n: usize, out: *mut DecayComplex) -> DecayStatus {
    guard(|| {
        if n == 0 {
            return Err(DecayError::Domain("pole index starts at 1".into()).into());
        }
        let poles = handle(h)?.0.find_resonance_poles(n)?;
        write_out(out, "out", poles[n - 1].into())
    })
}

/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_delta_shell_decompose_survival(h: *const DecayDeltaShell, final_time: f64, t: f64, out: *mut DecayHistory) -> DecayStatus {
    guard(|| write_out(out, "out", decompose_survival(&handle(h)?.0, final_time, t)?.into()))
}

/// Nonescape decomposition with `basis_size` box states; fails with
/// `DECAY_STATUS_CONVERGENCE` when the truncation estimate exceeds
/// `tolerance`. `estimate` may be NULL.
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes; `estimate` is NULL or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_delta_shell_decompose_nonescape(
    h: *const DecayDeltaShell,
    final_time: f64,
    t: f64,
    basis_size: u32,
    tolerance: f64,
    out: *mut DecayHistory,
    estimate: *mut f64,
) -> DecayStatus {
    guard(|| {
        let d = decompose_nonescape(&handle(h)?.0, final_time, t, basis_size, tolerance)?;
        if !estimate.is_null() {
            estimate.write(d.convergence_estimate);
        }
        write_out(out, "out", d.decomposition.into())
    })
}

// Detector model.

/// # Safety
/// `out` must be valid for writes. Release with `decay_detector_free`.
#[no_mangle]
pub unsafe extern "C" fn decay_detector_new(eta: f64, v0: f64, out: *mut *mut DecayDetector) -> DecayStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let sys = DetectorSystem::new(eta, v0)?;
        out.write(Box::into_raw(Box::new(DecayDetector(sys))));
        Ok(())
    })
}

/// # Safety
/// `h` is NULL or a handle from `decay_detector_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn decay_detector_free(h: *mut DecayDetector) {
    if !h.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(h))));
    }
}

/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_detector_survival_amplitude(h: *const DecayDetector, t: f64, out: *mut DecayComplex) -> DecayStatus {
    guard(|| write_out(out, "out", handle(h)?.0.survival_amplitude(t)?.into()))
}

/// The pole continued from the Hermitian resonance, in the outside
/// wavenumber `q`.
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_detector_pole(h: *const DecayDetector, out: *mut DecayComplex) -> DecayStatus {
    guard(|| {
        let q = handle(h)?.0.detector_pole().ok_or_else(|| DecayError::SearchFailure {
            seed: Complex64::new(0.0, 0.0),
            reason: "no detector pole was tracked".into(),
        })?;
        write_out(out, "out", q.into())
    })
}

/// Number of localized states found at construction.
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_detector_localized_count(h: *const DecayDetector, out: *mut usize) -> DecayStatus {
    guard(|| write_out(out, "out", handle(h)?.0.localized().len()))
}

/// Complex energy `q_j² - iV₀` of localized state `index` (from 0).
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_detector_localized_energy(h: *const DecayDetector, index: usize, out: *mut DecayComplex) -> DecayStatus {
    guard(|| {
        let states = handle(h)?.0.localized();
        let s = states
            .get(index)
            .ok_or_else(|| DecayError::Domain(format!("localized state {index} out of range (have {})", states.len())))?;
        write_out(out, "out", s.energy.into())
    })
}

/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_detector_decompose_survival(h: *const DecayDetector, final_time: f64, t: f64, out: *mut DecayHistory) -> DecayStatus {
    guard(|| write_out(out, "out", decompose_survival(&handle(h)?.0, final_time, t)?.into()))
}

// Single-resonance model.

/// # Safety
/// `out` must be valid for writes. Release with `decay_resonance_free`.
#[no_mangle]
pub unsafe extern "C" fn decay_resonance_new(re: f64, im: f64, out: *mut *mut DecayResonance) -> DecayStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let pole = ResonancePole::new(Complex64::new(re, im))?;
        out.write(Box::into_raw(Box::new(DecayResonance(pole))));
        Ok(())
    })
}

/// # Safety
/// `h` is NULL or a handle from `decay_resonance_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn decay_resonance_free(h: *mut DecayResonance) {
    if !h.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(h))));
    }
}

/// Closed-form survival amplitude.
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_resonance_survival_amplitude(h: *const DecayResonance, t: f64, out: *mut DecayComplex) -> DecayStatus {
    guard(|| write_out(out, "out", handle(h)?.0.amplitude(t)?.into()))
}

/// Survival amplitude by contour integration.
///
/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_resonance_survival_amplitude_contour(h: *const DecayResonance, t: f64, out: *mut DecayComplex) -> DecayStatus {
    guard(|| write_out(out, "out", handle(h)?.0.survival_amplitude_contour(t)?.into()))
}

/// # Safety
/// `h` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn decay_resonance_decompose_survival(h: *const DecayResonance, final_time: f64, t: f64, out: *mut DecayHistory) -> DecayStatus {
    guard(|| write_out(out, "out", decompose_survival(&handle(h)?.0, final_time, t)?.into()))
}
