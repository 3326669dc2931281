//! C ABI over the fracsource library.
//!
//! Every entry point returns an [`FsStatus`]; results travel through out
//! pointers and long-lived objects through opaque handles created and
//! destroyed here (`fs_*_free` accepts null). On a non-OK status a
//! thread-local message describing the failure is available through
//! [`fs_last_error_message`] until the next failing call on that thread.
//! Panics are caught at the boundary and reported as [`FsStatus::Panic`]
//! instead of unwinding into the caller.
//!
//! Pointer contract: every pointer argument may be null; a null handle or
//! out pointer yields [`FsStatus::NullPointer`] (a null passed to a free
//! function is a no-op) and is never dereferenced. Non-null pointers must
//! be valid for their role: handles must come from the matching `fs_*_new`
//! constructor and not have been freed, out parameters must be writable,
//! and array parameters must cover the stated length.
//!
//! The matching C header is generated into `include/fracsource.h` by the
//! build script.

use fracsource::estimator::{choose_m, estimate, Estimate, ZeroMode};
use fracsource::forward::{forward_map, kernel, ProblemSpec, TimeFactor};
use fracsource::mittag_leffler::{mlf, mlf_one, MlfQuery};
use fracsource::observation::{observe, NoiseSpec, Observations, SigmaMode};
use fracsource::spectral::SpectralCoefficients;
use fracsource::Error;
use libc::{c_char, size_t};
use std::cell::RefCell;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every call. Values above `FS_STATUS_OK` are failures; the
/// thread-local message explains the most recent one.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    /// A mathematical parameter is outside the supported domain.
    Domain = 1,
    /// A structural precondition is violated (sizes, ordering, ranges).
    InvalidArgument = 2,
    /// Configuration input is malformed.
    Config = 3,
    /// A numerical method could not reach its tolerance.
    Numerical = 4,
    /// An I/O operation failed.
    Io = 5,
    /// A required pointer argument is null.
    NullPointer = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

/// Per-point noise level policy under the bound v_max.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FsSigmaMode {
    /// sigma_k = v_max / 2 for every point.
    Constant = 0,
    /// sigma_k drawn uniformly from [0, v_max) per point.
    Uniform = 1,
}

/// Normalization of the reconstructed zero mode.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FsZeroMode {
    /// Orthonormal-basis normalization (divide by b_0).
    Consistent = 0,
    /// Display-form normalization (divide by Gamma(alpha) b_0).
    Literal = 1,
}

/// A validated problem instance (order, horizon, time factor).
pub struct FsProblem(ProblemSpec);

/// Cosine coefficients c_0..=c_P.
pub struct FsCoefficients(SpectralCoefficients);

/// One realized data set on a midpoint grid.
pub struct FsObservations(Observations);

/// A truncated reconstruction with its provenance.
pub struct FsEstimate(Estimate);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: String) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn fail(e: &Error) -> FsStatus {
    set_last_error(e.to_string());
    match e {
        Error::Domain(_) => FsStatus::Domain,
        Error::InvalidArgument(_) => FsStatus::InvalidArgument,
        Error::Config(_) => FsStatus::Config,
        Error::Numerical { .. } => FsStatus::Numerical,
        Error::Io(_) => FsStatus::Io,
    }
}

fn null_pointer(what: &str) -> FsStatus {
    set_last_error(format!("{what} must not be null"));
    FsStatus::NullPointer
}

fn invalid(message: String) -> FsStatus {
    set_last_error(message);
    FsStatus::InvalidArgument
}

/// Run `body` with a panic net; used by every exported function.
fn guarded(body: impl FnOnce() -> FsStatus) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "opaque panic payload".to_owned());
            set_last_error(format!("panic caught at the C boundary: {what}"));
            FsStatus::Panic
        }
    }
}

/// Copy the most recent error message into `buf` (NUL-terminated,
/// truncating to `cap`) and return the byte length the full message needs
/// including the NUL. With a null `buf` or zero `cap` nothing is copied,
/// so the return value can size an exact buffer first.
///
/// # Safety
/// `buf`, if non-null, must be writable for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn fs_last_error_message(buf: *mut c_char, cap: size_t) -> size_t {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let copy = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, copy);
            *buf.add(copy) = 0;
        }
        bytes.len() + 1
    })
}

/// E_{alpha,beta}(z) for alpha in (0,1], beta in (0,2], z <= 0.
///
/// # Safety
/// `out`, if non-null, must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_mlf(alpha: f64, beta: f64, z: f64, out: *mut f64) -> FsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match MlfQuery::new(alpha, beta, z) {
            Ok(q) => {
                *out = mlf(q);
                FsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// E_{alpha,1}(-x) for x >= 0.
///
/// # Safety
/// `out`, if non-null, must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_mlf_one(alpha: f64, x: f64, out: *mut f64) -> FsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match mlf_one(alpha, x) {
            Ok(v) => {
                *out = v;
                FsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Truncation rule M = max(1, floor(n^{1/(5+2 beta)})) clamped to n-1.
///
/// # Safety
/// `out`, if non-null, must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_choose_m(n: size_t, beta: f64, out: *mut size_t) -> FsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if n < 2 {
            return invalid(format!("truncation rule needs n >= 2, got {n}"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return invalid(format!("smoothness index must be positive, got {beta}"));
        }
        *out = choose_m(n, beta);
        FsStatus::Ok
    })
}

fn emit_problem(out: *mut *mut FsProblem, spec: fracsource::Result<ProblemSpec>) -> FsStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match spec {
        Ok(spec) => {
            unsafe { *out = Box::into_raw(Box::new(FsProblem(spec))) };
            FsStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Problem with the constant time factor R(t) = value.
///
/// # Safety
/// `out`, if non-null, must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn fs_problem_new_constant(
    alpha: f64,
    t_final: f64,
    value: f64,
    out: *mut *mut FsProblem,
) -> FsStatus {
    guarded(|| {
        emit_problem(
            out,
            ProblemSpec::new(alpha, t_final, TimeFactor::Constant(value)),
        )
    })
}

/// Problem with the time factor R(t) = offset + amplitude sin t.
///
/// # Safety
/// `out`, if non-null, must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn fs_problem_new_offset_sine(
    alpha: f64,
    t_final: f64,
    offset: f64,
    amplitude: f64,
    out: *mut *mut FsProblem,
) -> FsStatus {
    guarded(|| {
        emit_problem(
            out,
            ProblemSpec::new(alpha, t_final, TimeFactor::OffsetSine { offset, amplitude }),
        )
    })
}

/// # Safety
/// `problem` must be null or an unfreed handle from a problem constructor;
/// it must not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn fs_problem_free(problem: *mut FsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Kernel value b_p of the forward map.
///
/// # Safety
/// `problem`, if non-null, must be a live handle; `out`, if non-null,
/// must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_kernel(
    problem: *const FsProblem,
    p: size_t,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        let Some(problem) = problem.as_ref() else {
            return null_pointer("problem");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match kernel(&problem.0, p) {
            Ok(kv) => {
                *out = kv.value;
                FsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Coefficient vector c_0..=c_{len-1}; `values` must hold `len` finite
/// doubles.
///
/// # Safety
/// `values`, if non-null, must be readable for `len` doubles; `out`, if
/// non-null, must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn fs_coefficients_new(
    values: *const f64,
    len: size_t,
    out: *mut *mut FsCoefficients,
) -> FsStatus {
    guarded(|| {
        if values.is_null() {
            return null_pointer("values");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let slice = std::slice::from_raw_parts(values, len);
        match SpectralCoefficients::new(slice.to_vec()) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(FsCoefficients(c)));
                FsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of stored coefficients (bandlimit plus one).
///
/// # Safety
/// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
/// must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_coefficients_len(
    coeffs: *const FsCoefficients,
    out: *mut size_t,
) -> FsStatus {
    guarded(|| {
        let Some(coeffs) = coeffs.as_ref() else {
            return null_pointer("coeffs");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = coeffs.0.max_mode() + 1;
        FsStatus::Ok
    })
}

/// c_p, with modes beyond the bandlimit reading as zero.
///
/// # Safety
/// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
/// must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_coefficients_get(
    coeffs: *const FsCoefficients,
    p: size_t,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        let Some(coeffs) = coeffs.as_ref() else {
            return null_pointer("coeffs");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = coeffs.0.get(p);
        FsStatus::Ok
    })
}

/// Pointwise synthesis sum_p c_p phi_p(x).
///
/// # Safety
/// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
/// must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_synthesize(
    coeffs: *const FsCoefficients,
    x: f64,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        let Some(coeffs) = coeffs.as_ref() else {
            return null_pointer("coeffs");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = coeffs.0.synthesize(x);
        FsStatus::Ok
    })
}

/// Squared Sobolev norm sum_p p^{2 beta} c_p^2 (zero mode excluded).
///
/// # Safety
/// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
/// must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_sobolev_norm_sq(
    coeffs: *const FsCoefficients,
    beta: f64,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        let Some(coeffs) = coeffs.as_ref() else {
            return null_pointer("coeffs");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        if !(beta.is_finite() && beta > 0.0) {
            return invalid(format!("sobolev index must be positive, got {beta}"));
        }
        *out = coeffs.0.sobolev_norm_sq(beta);
        FsStatus::Ok
    })
}

/// # Safety
/// `coeffs` must be null or an unfreed handle from [`fs_coefficients_new`]
/// or [`fs_forward_map`]; it must not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn fs_coefficients_free(coeffs: *mut FsCoefficients) {
    if !coeffs.is_null() {
        drop(Box::from_raw(coeffs));
    }
}

/// Coefficients of u(., T) for the source f: u_p = b_p f_p.
///
/// # Safety
/// `problem` and `f`, if non-null, must be live handles; `out`, if
/// non-null, must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn fs_forward_map(
    problem: *const FsProblem,
    f: *const FsCoefficients,
    out: *mut *mut FsCoefficients,
) -> FsStatus {
    guarded(|| {
        let Some(problem) = problem.as_ref() else {
            return null_pointer("problem");
        };
        let Some(f) = f.as_ref() else {
            return null_pointer("f");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match forward_map(&problem.0, &f.0) {
            Ok(ut) => {
                *out = Box::into_raw(Box::new(FsCoefficients(ut)));
                FsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Noisy samples of u(., T) on the n-point midpoint grid.
///
/// # Safety
/// `problem` and `f`, if non-null, must be live handles; `out`, if
/// non-null, must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn fs_observe(
    problem: *const FsProblem,
    f: *const FsCoefficients,
    n: size_t,
    v_max: f64,
    sigma_mode: FsSigmaMode,
    seed: u64,
    out: *mut *mut FsObservations,
) -> FsStatus {
    guarded(|| {
        let Some(problem) = problem.as_ref() else {
            return null_pointer("problem");
        };
        let Some(f) = f.as_ref() else {
            return null_pointer("f");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let mode = match sigma_mode {
            FsSigmaMode::Constant => SigmaMode::Constant,
            FsSigmaMode::Uniform => SigmaMode::Uniform,
        };
        let run = || -> fracsource::Result<Observations> {
            let noise = NoiseSpec::new(v_max, mode, seed)?;
            observe(&problem.0, &f.0, n, &noise)
        };
        match run() {
            Ok(obs) => {
                *out = Box::into_raw(Box::new(FsObservations(obs)));
                FsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of observed points.
///
/// # Safety
/// `obs`, if non-null, must be a live handle; `out`, if non-null, must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_observations_len(
    obs: *const FsObservations,
    out: *mut size_t,
) -> FsStatus {
    guarded(|| {
        let Some(obs) = obs.as_ref() else {
            return null_pointer("obs");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = obs.0.len();
        FsStatus::Ok
    })
}

/// u~_T(x_k) for k < len.
///
/// # Safety
/// `obs`, if non-null, must be a live handle; `out`, if non-null, must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_observations_value(
    obs: *const FsObservations,
    k: size_t,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        let Some(obs) = obs.as_ref() else {
            return null_pointer("obs");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match obs.0.values().get(k) {
            Some(&v) => {
                *out = v;
                FsStatus::Ok
            }
            None => invalid(format!("index {k} out of range for {} points", obs.0.len())),
        }
    })
}

/// sigma_k for k < len.
///
/// # Safety
/// `obs`, if non-null, must be a live handle; `out`, if non-null, must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_observations_sigma(
    obs: *const FsObservations,
    k: size_t,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        let Some(obs) = obs.as_ref() else {
            return null_pointer("obs");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match obs.0.sigmas().get(k) {
            Some(&v) => {
                *out = v;
                FsStatus::Ok
            }
            None => invalid(format!("index {k} out of range for {} points", obs.0.len())),
        }
    })
}

/// # Safety
/// `obs` must be null or an unfreed handle from [`fs_observe`]; it must
/// not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn fs_observations_free(obs: *mut FsObservations) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

/// Truncated reconstruction of the source from one observation set.
///
/// # Safety
/// `obs` and `problem`, if non-null, must be live handles; `out`, if
/// non-null, must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn fs_estimate(
    obs: *const FsObservations,
    problem: *const FsProblem,
    m: size_t,
    zero_mode: FsZeroMode,
    out: *mut *mut FsEstimate,
) -> FsStatus {
    guarded(|| {
        let Some(obs) = obs.as_ref() else {
            return null_pointer("obs");
        };
        let Some(problem) = problem.as_ref() else {
            return null_pointer("problem");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let mode = match zero_mode {
            FsZeroMode::Consistent => ZeroMode::Consistent,
            FsZeroMode::Literal => ZeroMode::Literal,
        };
        match estimate(&obs.0, &problem.0, m, mode) {
            Ok(est) => {
                *out = Box::into_raw(Box::new(FsEstimate(est)));
                FsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Truncation level M of the reconstruction.
///
/// # Safety
/// `est`, if non-null, must be a live handle; `out`, if non-null, must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_estimate_truncation(
    est: *const FsEstimate,
    out: *mut size_t,
) -> FsStatus {
    guarded(|| {
        let Some(est) = est.as_ref() else {
            return null_pointer("est");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = est.0.truncation();
        FsStatus::Ok
    })
}

/// Number of samples the reconstruction was built from.
///
/// # Safety
/// `est`, if non-null, must be a live handle; `out`, if non-null, must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_estimate_sample_count(
    est: *const FsEstimate,
    out: *mut size_t,
) -> FsStatus {
    guarded(|| {
        let Some(est) = est.as_ref() else {
            return null_pointer("est");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = est.0.sample_count();
        FsStatus::Ok
    })
}

/// Reconstructed coefficient c~_p for p <= M.
///
/// # Safety
/// `est`, if non-null, must be a live handle; `out`, if non-null, must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fs_estimate_coefficient(
    est: *const FsEstimate,
    p: size_t,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        let Some(est) = est.as_ref() else {
            return null_pointer("est");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        if p > est.0.truncation() {
            return invalid(format!(
                "mode {p} exceeds the truncation level {}",
                est.0.truncation()
            ));
        }
        *out = est.0.coefficients().get(p);
        FsStatus::Ok
    })
}

/// # Safety
/// `est` must be null or an unfreed handle from [`fs_estimate`]; it must
/// not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn fs_estimate_free(est: *mut FsEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}
