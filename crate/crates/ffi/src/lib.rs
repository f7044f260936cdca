//! C ABI over `levy-cramer`.
//!
//! Every fallible function returns an [`LcStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`lc_last_error_message`]. Models and batches are opaque
//! handles owned by the caller and released with their `_free` function.

use levy_cramer::closed_forms::exact_law_of;
use levy_cramer::{estimate_constant, hill_estimate, phi, sample_a_infinity, solve_cramer, Error, LevyModel, SampleBatch};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes. `LC_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidModel = 4,
    Domain = 5,
    PhiInfinite = 6,
    NoRoot = 7,
    UnsupportedTilt = 8,
    NoClosedForm = 9,
    NonTermination = 10,
    DegenerateInput = 11,
    InsufficientTail = 12,
    LadderTimeout = 13,
    Format = 14,
    Io = 15,
    BufferTooSmall = 16,
    Panic = 17,
}

impl From<&Error> for LcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => LcStatus::Parse,
            Error::InvalidModel(_) => LcStatus::InvalidModel,
            Error::Domain(_) => LcStatus::Domain,
            Error::PhiInfinite { .. } => LcStatus::PhiInfinite,
            Error::NoRoot(_) => LcStatus::NoRoot,
            Error::UnsupportedTilt(_) => LcStatus::UnsupportedTilt,
            Error::NoClosedForm(_) => LcStatus::NoClosedForm,
            Error::NonTermination { .. } => LcStatus::NonTermination,
            Error::DegenerateInput(_) => LcStatus::DegenerateInput,
            Error::InsufficientTail(_) => LcStatus::InsufficientTail,
            Error::LadderTimeout { .. } => LcStatus::LadderTimeout,
            Error::Format(_) => LcStatus::Format,
            Error::Io(_) => LcStatus::Io,
        }
    }
}

/// Opaque Lévy model handle.
pub struct LcModel(LevyModel);

/// Opaque sample batch handle.
pub struct LcBatch(SampleBatch);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LcCramer {
    pub chi: f64,
    pub phi_prime_at_chi: f64,
    /// `-phi'(chi)`, the drift of the tilted process.
    pub tilt_mean_m: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub iterations: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LcEstimate {
    pub value: f64,
    pub se: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LcConstant {
    pub c_hat: f64,
    pub c_se: f64,
    pub m: f64,
    pub chi: f64,
    pub n: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (LcStatus, String)>) -> LcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LcStatus::Panic
        }
    }
}

fn lib(e: Error) -> (LcStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (LcStatus, String) {
    (LcStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn model_ref<'a>(model: *const LcModel) -> Result<&'a LevyModel, (LcStatus, String)> {
    model.as_ref().map(|m| &m.0).ok_or_else(|| null("model"))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn lc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a model spec such as `cpp:a=0.5,b=1` into a new handle.
///
/// # Safety
/// `spec` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_model_parse(spec: *const c_char, out: *mut *mut LcModel) -> LcStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let text = CStr::from_ptr(spec).to_str().map_err(|e| (LcStatus::InvalidUtf8, e.to_string()))?;
        let model: LevyModel = text.parse().map_err(lib)?;
        *out = Box::into_raw(Box::new(LcModel(model)));
        Ok(())
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from [`lc_model_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lc_model_free(model: *mut LcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Laplace exponent `phi(lambda)`, with `E exp(lambda xi_t) = exp(-t phi(lambda))`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_model_phi(model: *const LcModel, lambda: f64, out: *mut f64) -> LcStatus {
    guard(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = phi(model, lambda).map_err(lib)?;
        Ok(())
    })
}

/// Solves `phi(chi) = 0` for the positive Cramér root.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_solve_cramer(model: *const LcModel, out: *mut LcCramer) -> LcStatus {
    guard(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = solve_cramer(model).map_err(lib)?;
        *out = LcCramer {
            chi: s.chi,
            phi_prime_at_chi: s.phi_prime_at_chi,
            tilt_mean_m: s.tilt_mean_m,
            bracket_lo: s.bracket.0,
            bracket_hi: s.bracket.1,
            iterations: s.iterations,
        };
        Ok(())
    })
}

/// Samples `n` draws of `A_inf` into a new batch handle.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_sample_a_infinity(
    model: *const LcModel,
    n: u64,
    step: f64,
    tol: f64,
    seed: u64,
    out: *mut *mut LcBatch,
) -> LcStatus {
    guard(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n = usize::try_from(n).map_err(|_| (LcStatus::Domain, format!("n = {n} is too large")))?;
        let batch = sample_a_infinity(model, n, step, tol, seed).map_err(lib)?;
        *out = Box::into_raw(Box::new(LcBatch(batch)));
        Ok(())
    })
}

/// Number of values in a batch; 0 for null.
///
/// # Safety
/// `batch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lc_batch_len(batch: *const LcBatch) -> usize {
    batch.as_ref().map_or(0, |b| b.0.values.len())
}

/// Copies the batch values into `dst`, which holds `capacity` doubles.
///
/// # Safety
/// `batch` must be a live handle; `dst` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_batch_copy(batch: *const LcBatch, dst: *mut f64, capacity: usize) -> LcStatus {
    guard(|| {
        let batch = batch.as_ref().ok_or_else(|| null("batch"))?;
        if dst.is_null() {
            return Err(null("dst"));
        }
        let values = &batch.0.values;
        if capacity < values.len() {
            return Err((LcStatus::BufferTooSmall, format!("need {} doubles, got {capacity}", values.len())));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), dst, values.len());
        Ok(())
    })
}

/// Releases a batch handle. Null is ignored.
///
/// # Safety
/// `batch` must come from [`lc_sample_a_infinity`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lc_batch_free(batch: *mut LcBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// Hill estimate of the tail index from the top `k` of `len` values (any order).
///
/// # Safety
/// `values` must be readable for `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_hill_estimate(values: *const f64, len: usize, k: usize, out: *mut LcEstimate) -> LcStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let mut sorted = std::slice::from_raw_parts(values, len).to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let (value, se) = hill_estimate(&sorted, k).map_err(lib)?;
        *out = LcEstimate { value, se };
        Ok(())
    })
}

/// Monte-Carlo estimate of the tail constant `C`, solving for the Cramér root first.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_estimate_constant(
    model: *const LcModel,
    n: u64,
    step: f64,
    tol: f64,
    seed: u64,
    out: *mut LcConstant,
) -> LcStatus {
    guard(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n_rep = usize::try_from(n).map_err(|_| (LcStatus::Domain, format!("n = {n} is too large")))?;
        let cramer = solve_cramer(model).map_err(lib)?;
        let est = estimate_constant(model, &cramer, n_rep, step, tol, seed).map_err(lib)?;
        *out = LcConstant { c_hat: est.c_hat, c_se: est.c_se, m: est.m, chi: est.chi, n };
        Ok(())
    })
}

/// Exact tail constant for models with a closed-form law.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_exact_tail_constant(model: *const LcModel, out: *mut f64) -> LcStatus {
    guard(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = exact_law_of(model).map_err(lib)?.tail_constant();
        Ok(())
    })
}
