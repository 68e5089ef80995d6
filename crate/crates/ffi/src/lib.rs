//! C ABI over `fading_sched`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns an [`FsStatus`]; on failure a message is available from
//! [`fs_last_error_message`] on the same thread until the next failing call.
//! Panics never unwind into C; they are reported as [`FsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fading_sched::network::{throughput, Gains};
use fading_sched::scheduler::{schedule, HeuristicConfig, ScheduleMode};
use fading_sched::solvers::{exhaustive_optimal, greedy_insertion, search_space_size, weight_bounded_search};
use fading_sched::{ActivationVector, ChannelMatrix, Distribution, Error, ModelParams};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Parse = 4,
    Guard = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsScheduleMode {
    Theorem = 0,
    Adaptive = 1,
    Fixed = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsSolver {
    Exhaustive = 0,
    WeightBounded = 1,
    Greedy = 2,
}

/// Opaque channel-power law.
pub struct FsDistribution {
    inner: Distribution,
}

/// Opaque dense channel instance.
pub struct FsChannel {
    inner: ChannelMatrix,
}

/// Outcome of [`fs_schedule`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsScheduleOutcome {
    pub t_target: usize,
    pub t_realized: usize,
}

/// Outcome of [`fs_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsSolveOutcome {
    pub best_t: usize,
    pub explored: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FsStatus {
    match e {
        Error::Parse(_) => FsStatus::Parse,
        Error::Domain(_) => FsStatus::Domain,
        Error::InvalidArgument(_) | Error::InactiveReceiver(_) | Error::Dimension { .. } => FsStatus::InvalidArgument,
        Error::TailUnderflow { .. } | Error::DensityUnderflow { .. } | Error::NonConvergence(_) => FsStatus::Numerical,
        Error::GuardExceeded { .. } => FsStatus::Guard,
        Error::Io(_) => FsStatus::Io,
    }
}

struct Fail(FsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FsStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            FsStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn dist_ref<'a>(d: *const FsDistribution) -> Result<&'a Distribution, Fail> {
    d.as_ref().map(|d| &d.inner).ok_or_else(|| null("distribution"))
}

unsafe fn channel_ref<'a>(c: *const FsChannel) -> Result<&'a ChannelMatrix, Fail> {
    c.as_ref().map(|c| &c.inner).ok_or_else(|| null("channel"))
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a spec such as `gamma:m=2,omega=1`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_distribution_parse(spec: *const c_char, out: *mut *mut FsDistribution) -> FsStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Fail(FsStatus::Parse, "spec is not valid UTF-8".into()))?;
        let d = Distribution::new(text.parse()?)?;
        write(out, Box::into_raw(Box::new(FsDistribution { inner: d })), "out")
    })
}

/// # Safety
/// `d` must come from [`fs_distribution_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_distribution_free(d: *mut FsDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Density `f(x)`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_distribution_pdf(d: *const FsDistribution, x: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let v = dist_ref(d)?.pdf(x)?;
        write(out, v, "out")
    })
}

/// Distribution function `F(x)`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_distribution_cdf(d: *const FsDistribution, x: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let v = dist_ref(d)?.cdf(x)?;
        write(out, v, "out")
    })
}

/// Quantile `F^-1(p)` for `0 <= p < 1`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_distribution_quantile(d: *const FsDistribution, p: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let v = dist_ref(d)?.quantile(p)?;
        write(out, v, "out")
    })
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_distribution_mean(d: *const FsDistribution, out: *mut f64) -> FsStatus {
    guard(|| {
        let v = dist_ref(d)?.mean();
        write(out, v, "out")
    })
}

/// Solves `G(t) = n` for the throughput function of `d`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_g_inverse(d: *const FsDistribution, beta: f64, n: f64, tol: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let v = fading_sched::scheduler::g_inverse(dist_ref(d)?, beta, n, tol)?;
        write(out, v, "out")
    })
}

/// Draws an `n x n` instance from `d`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_channel_generate(
    n: usize,
    d: *const FsDistribution,
    seed: u64,
    out: *mut *mut FsChannel,
) -> FsStatus {
    guard(|| {
        let m = ChannelMatrix::generate(n, dist_ref(d)?, seed)?;
        write(out, Box::into_raw(Box::new(FsChannel { inner: m })), "out")
    })
}

/// Builds an instance from `n * n` row-major gains (`gains[i * n + j]` is
/// source `i` to destination `j`).
///
/// # Safety
/// `gains` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_channel_from_gains(n: usize, gains: *const f64, out: *mut *mut FsChannel) -> FsStatus {
    guard(|| {
        if gains.is_null() {
            return Err(null("gains"));
        }
        let len = n
            .checked_mul(n)
            .ok_or_else(|| Fail(FsStatus::InvalidArgument, "n * n overflows".into()))?;
        let v = std::slice::from_raw_parts(gains, len).to_vec();
        let m = ChannelMatrix::from_flat(n, v)?;
        write(out, Box::into_raw(Box::new(FsChannel { inner: m })), "out")
    })
}

/// # Safety
/// `c` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_channel_free(c: *mut FsChannel) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Pair count, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_channel_n(c: *const FsChannel) -> usize {
    c.as_ref().map_or(0, |c| c.inner.n())
}

/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_channel_gain(c: *const FsChannel, src: usize, dst: usize, out: *mut f64) -> FsStatus {
    guard(|| {
        let m = channel_ref(c)?;
        if src >= m.n() || dst >= m.n() {
            return Err(Fail(FsStatus::InvalidArgument, format!("index ({src}, {dst}) out of range")));
        }
        write(out, m.gain(src, dst), "out")
    })
}

unsafe fn activation(x: *const u8, len: usize) -> Result<ActivationVector, Fail> {
    if x.is_null() && len > 0 {
        return Err(null("x"));
    }
    let bits = if len == 0 { &[][..] } else { std::slice::from_raw_parts(x, len) };
    Ok(ActivationVector::from_bools(bits.iter().map(|&b| b != 0).collect()))
}

unsafe fn export(x: &ActivationVector, out: *mut u8) {
    if !out.is_null() {
        for (i, &b) in x.as_bools().iter().enumerate() {
            out.add(i).write(u8::from(b));
        }
    }
}

/// Counts successful receivers for activation `x` (`len` bytes, nonzero = on).
///
/// # Safety
/// `c` must be a live handle; `x` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn fs_throughput(
    c: *const FsChannel,
    beta: f64,
    n0: f64,
    x: *const u8,
    len: usize,
    out: *mut usize,
) -> FsStatus {
    guard(|| {
        let m = channel_ref(c)?;
        let p = ModelParams::new(beta, n0)?;
        let t = throughput(m, &activation(x, len)?, &p)?;
        write(out, t, "out")
    })
}

/// Runs the strongest-direct-links heuristic. `t` is used only in fixed
/// mode. When `x_out` is not null it receives `n` bytes of activation.
///
/// # Safety
/// Handles must be live; `x_out` must be null or hold `n` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fs_schedule(
    c: *const FsChannel,
    d: *const FsDistribution,
    beta: f64,
    n0: f64,
    mode: FsScheduleMode,
    epsilon: f64,
    delta: f64,
    t: usize,
    x_out: *mut u8,
    out: *mut FsScheduleOutcome,
) -> FsStatus {
    guard(|| {
        let m = channel_ref(c)?;
        let dist = dist_ref(d)?;
        let p = ModelParams::new(beta, n0)?;
        let mode = match mode {
            FsScheduleMode::Theorem => ScheduleMode::TheoremFaithful,
            FsScheduleMode::Adaptive => ScheduleMode::AdaptivePrefix,
            FsScheduleMode::Fixed => ScheduleMode::FixedCount(t),
        };
        let cfg = HeuristicConfig { epsilon, delta, mode };
        cfg.validate(m.n())?;
        let r = schedule(m, dist, &p, &cfg)?;
        export(&r.x, x_out);
        write(
            out,
            FsScheduleOutcome {
                t_target: r.t_target,
                t_realized: r.t_realized,
            },
            "out",
        )
    })
}

/// Runs a reference solver. `w_max` applies to weight-bounded search and
/// `n_guard` to exhaustive search.
///
/// # Safety
/// `c` must be a live handle; `x_out` must be null or hold `n` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fs_solve(
    c: *const FsChannel,
    beta: f64,
    n0: f64,
    solver: FsSolver,
    w_max: usize,
    n_guard: usize,
    x_out: *mut u8,
    out: *mut FsSolveOutcome,
) -> FsStatus {
    guard(|| {
        let m = channel_ref(c)?;
        let p = ModelParams::new(beta, n0)?;
        let r = match solver {
            FsSolver::Exhaustive => exhaustive_optimal(m, &p, n_guard)?,
            FsSolver::WeightBounded => weight_bounded_search(m, &p, w_max)?,
            FsSolver::Greedy => greedy_insertion(m, &p)?,
        };
        export(&r.best_x, x_out);
        write(
            out,
            FsSolveOutcome {
                best_t: r.best_t,
                explored: r.explored,
            },
            "out",
        )
    })
}

/// Exact `sum_{i=0}^{w_max} C(n, i)` as a decimal string; release it with
/// [`fs_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_search_space_size(n: u64, w_max: u64, out: *mut *mut c_char) -> FsStatus {
    guard(|| {
        let s = search_space_size(n, w_max)?.to_str_radix(10);
        let c = CString::new(s).expect("digits contain no NUL");
        write(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
