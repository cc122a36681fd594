//! C ABI for `lipq`.
//!
//! Every fallible call returns a [`LipqStatus`] and writes its result through
//! an out-pointer, which is left untouched on failure. Objects are opaque
//! handles created by `*_new`/`*_run`/`lipq_simulate` and released by the
//! matching `*_free`. The message of the last failure on the calling thread
//! is available from [`lipq_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lipq::harness::{run_lip_experiment, ExperimentConfig, LipDataset};
use lipq::heavytail::{tail_constant, TailScale};
use lipq::intense::longest_intense;
use lipq::measures::{combined_tail_estimate, mu1_tail, mu2_tail, ModelParams, DEFAULT_REL_TOL};
use lipq::reflect::{lindley_step, simulate_queue, Embedding, QueuePath};
use lipq::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipqStatus {
    Ok = 0,
    Domain = 1,
    InvalidParameter = 2,
    InsufficientData = 3,
    NullPointer = 4,
    Io = 5,
    Parse = 6,
    Panic = 7,
}

/// Arrivals embedded as pure steps at integer epochs.
pub const LIPQ_EMBEDDING_STEP: u32 = 0;
/// Arrivals as jumps at integer epochs with linear service in between.
pub const LIPQ_EMBEDDING_DRIFT: u32 = 1;

/// Queue and threshold parameters.
pub struct LipqModel {
    params: ModelParams,
}

/// One reflected queue path together with its intensity level.
pub struct LipqQueuePath {
    path: QueuePath,
    level: f64,
}

/// Per-replication results of a Monte Carlo experiment.
pub struct LipqDataset {
    data: LipDataset,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> LipqStatus {
    match e {
        Error::Domain(_) => LipqStatus::Domain,
        Error::InvalidParameter { .. } => LipqStatus::InvalidParameter,
        Error::InsufficientData(_) => LipqStatus::InsufficientData,
        Error::Parse(_) => LipqStatus::Parse,
        Error::Io(_) => LipqStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Run `f` behind the boundary: map errors and panics to status codes.
fn guard<F>(f: F) -> LipqStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LipqStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed as `{name}`"));
            LipqStatus::NullPointer
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            LipqStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for reads of `T`.
unsafe fn as_ref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

/// # Safety
/// `out` is null or valid for writes of `T`.
unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(value);
    Ok(())
}

fn embedding(code: u32) -> Result<Embedding, Failure> {
    match code {
        LIPQ_EMBEDDING_STEP => Ok(Embedding::Step),
        LIPQ_EMBEDDING_DRIFT => Ok(Embedding::Drift),
        other => Err(Error::Parse(format!("unknown embedding code {other}")).into()),
    }
}

/// Message of the last failure on this thread, or null if none. The string
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lipq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Validate parameters and create a model.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_model_new(
    alpha: f64,
    mean: f64,
    rate: f64,
    theta: f64,
    buffer: f64,
    horizon: f64,
    out: *mut *mut LipqModel,
) -> LipqStatus {
    guard(|| {
        let params = ModelParams::new(alpha, mean, rate, theta, buffer, horizon)?;
        write_out(out, Box::into_raw(Box::new(LipqModel { params })))
    })
}

/// Model with the desk parameters.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_model_desk(out: *mut *mut LipqModel) -> LipqStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(LipqModel { params: ModelParams::desk() }))))
}

/// # Safety
/// `model` is null or a handle from `lipq_model_new`/`lipq_model_desk` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lipq_model_free(model: *mut LipqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// `kappa = (1 - theta) K / (c - m)`.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_model_kappa(model: *const LipqModel, out: *mut f64) -> LipqStatus {
    guard(|| write_out(out, as_ref(model, "model")?.params.kappa()))
}

/// Asymptotic tail constant of the arrival law.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_tail_constant(model: *const LipqModel, out: *mut f64) -> LipqStatus {
    guard(|| {
        let dist = as_ref(model, "model")?.params.arrival_dist()?;
        write_out(out, tail_constant(&dist, TailScale::Asymptotic)?)
    })
}

/// Arrival survival function `P(A > z)`.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_survival(model: *const LipqModel, z: f64, out: *mut f64) -> LipqStatus {
    guard(|| {
        let dist = as_ref(model, "model")?.params.arrival_dist()?;
        write_out(out, dist.survival(z)?)
    })
}

/// Arrival by inverse transform of `u` in `(0, 1)`.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_sample_arrival(model: *const LipqModel, u: f64, out: *mut f64) -> LipqStatus {
    guard(|| {
        let dist = as_ref(model, "model")?.params.arrival_dist()?;
        write_out(out, dist.sample(u)?)
    })
}

/// First-level tail `mu1((l, inf))`, `l > 0`.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_mu1_tail(model: *const LipqModel, l: f64, out: *mut f64) -> LipqStatus {
    guard(|| write_out(out, mu1_tail(&as_ref(model, "model")?.params, l)?))
}

/// Second-level tail `mu2((l, inf))`, `l > kappa`.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_mu2_tail(model: *const LipqModel, l: f64, out: *mut f64) -> LipqStatus {
    guard(|| write_out(out, mu2_tail(&as_ref(model, "model")?.params, l, DEFAULT_REL_TOL)?))
}

/// Combined estimate of `P(L > l)` for tail constant `c`.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_combined_tail(
    model: *const LipqModel,
    c: f64,
    l: f64,
    out: *mut f64,
) -> LipqStatus {
    guard(|| write_out(out, combined_tail_estimate(&as_ref(model, "model")?.params, c, l)?))
}

/// One step of the buffered Lindley recursion.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_lindley_step(q_prev: f64, a: f64, c: f64, buffer: f64, out: *mut f64) -> LipqStatus {
    guard(|| write_out(out, lindley_step(q_prev, a, c, buffer)?))
}

/// Simulate one queue path with `M` arrivals.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_simulate(
    model: *const LipqModel,
    embedding_code: u32,
    seed: u64,
    out: *mut *mut LipqQueuePath,
) -> LipqStatus {
    guard(|| {
        let params = as_ref(model, "model")?.params;
        let qm = params.queue_model(embedding(embedding_code)?)?;
        let path = simulate_queue(&qm, params.horizon as usize, seed)?;
        write_out(
            out,
            Box::into_raw(Box::new(LipqQueuePath {
                path,
                level: params.level(),
            })),
        )
    })
}

/// # Safety
/// `path` is null or a handle from `lipq_simulate` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lipq_path_free(path: *mut LipqQueuePath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Length of the longest interval on which the queue exceeds `theta K`.
///
/// # Safety
/// `path` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_path_longest_intense(path: *const LipqQueuePath, out: *mut f64) -> LipqStatus {
    guard(|| {
        let p = as_ref(path, "path")?;
        write_out(out, longest_intense(&p.path, p.level)?)
    })
}

/// Work lost at the upper boundary.
///
/// # Safety
/// `path` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_path_lost_work(path: *const LipqQueuePath, out: *mut f64) -> LipqStatus {
    guard(|| write_out(out, as_ref(path, "path")?.path.lost_work()))
}

/// Queue content at time `t` in `[0, M]`.
///
/// # Safety
/// `path` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_path_value_at(path: *const LipqQueuePath, t: f64, out: *mut f64) -> LipqStatus {
    guard(|| write_out(out, as_ref(path, "path")?.path.value_at(t)?))
}

/// Run `reps` replications with default experiment settings.
///
/// # Safety
/// `model` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_experiment_run(
    model: *const LipqModel,
    reps: usize,
    seed: u64,
    out: *mut *mut LipqDataset,
) -> LipqStatus {
    guard(|| {
        let cfg = ExperimentConfig::new(as_ref(model, "model")?.params, reps, seed);
        cfg.validate()?;
        let data = run_lip_experiment(&cfg)?;
        write_out(out, Box::into_raw(Box::new(LipqDataset { data })))
    })
}

/// # Safety
/// `dataset` is null or a handle from `lipq_experiment_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lipq_dataset_free(dataset: *mut LipqDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of replications with `L > 0`.
///
/// # Safety
/// `dataset` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_dataset_n_positive(dataset: *const LipqDataset, out: *mut usize) -> LipqStatus {
    guard(|| write_out(out, as_ref(dataset, "dataset")?.data.n_positive()))
}

/// Estimate of `P(L > l)` and its binomial standard error.
///
/// # Safety
/// `dataset` is a live handle; `value` and `se` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lipq_dataset_tail(
    dataset: *const LipqDataset,
    l: f64,
    value: *mut f64,
    se: *mut f64,
) -> LipqStatus {
    guard(|| {
        if value.is_null() || se.is_null() {
            return Err(Failure::Null("value/se"));
        }
        let est = as_ref(dataset, "dataset")?.data.tail_fraction(l);
        write_out(value, est.value)?;
        write_out(se, est.se)
    })
}
