//! C interface to `noodl`.
//!
//! Objects are exposed as opaque handles created by `noodl_*` constructors
//! and released with the matching `*_free` function. Every fallible call
//! returns a [`NoodlStatus`]; on failure a message is available from
//! [`noodl_last_error`] on the same thread. Dictionaries cross the boundary
//! as column-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::{Array2, ShapeBuilder};
use noodl::model::{generate_ground_truth, incoherence, perturb_dictionary};
use noodl::runner::run_algorithm;
use noodl::{Algorithm, Dictionary, GenerativeConfig, NoodlError, RunResult, SolverConfig, Termination};
use serde::Deserialize;

/// Opaque dictionary handle.
pub struct NoodlDictionary(Dictionary);

/// Opaque handle to a finished run.
pub struct NoodlRun(RunResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoodlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Shape = 4,
    Degenerate = 5,
    Io = 6,
    Panic = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoodlAlgorithm {
    Noodl = 0,
    BiasedHt = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoodlTermination {
    MaxIters = 0,
    DictTol = 1,
    FitTol = 2,
    Degenerate = 3,
    DataExhausted = 4,
}

/// One trace row. Metrics that need ground truth are NaN when unavailable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoodlTraceRow {
    pub t: usize,
    pub max_col_err: f64,
    pub rel_frob_a: f64,
    pub rel_frob_x: f64,
    pub fit: f64,
    pub support_acc: f64,
    pub wall_ms: f64,
}

#[derive(Deserialize)]
struct RunConfig {
    model: GenerativeConfig,
    solver: SolverConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(NoodlStatus, String);

impl From<NoodlError> for Fail {
    fn from(e: NoodlError) -> Self {
        let status = match e {
            NoodlError::Config(_) | NoodlError::Json(_) => NoodlStatus::Config,
            NoodlError::Shape(_) | NoodlError::NotNormalized { .. } => NoodlStatus::Shape,
            NoodlError::DegenerateAtom { .. } => NoodlStatus::Degenerate,
            NoodlError::Io { .. } | NoodlError::Format { .. } => NoodlStatus::Io,
            NoodlError::Empty(_) => NoodlStatus::InvalidArgument,
            _ => NoodlStatus::Internal,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(NoodlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NoodlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NoodlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            NoodlStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message describing the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next `noodl_*` call on the same thread.
#[no_mangle]
pub extern "C" fn noodl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn noodl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Draws an `n x m` dictionary with i.i.d. Gaussian, unit-normalized columns.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn noodl_dictionary_generate(
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut NoodlDictionary,
) -> NoodlStatus {
    guard(|| {
        let d = generate_ground_truth(n, m, seed)?;
        store(out, NoodlDictionary(d))
    })
}

/// Rotates every atom of `truth` to column distance exactly `epsilon0`.
///
/// # Safety
/// `truth` must be a live handle and `out` a valid output pointer.
#[no_mangle]
pub unsafe extern "C" fn noodl_dictionary_perturb(
    truth: *const NoodlDictionary,
    epsilon0: f64,
    seed: u64,
    out: *mut *mut NoodlDictionary,
) -> NoodlStatus {
    guard(|| {
        let truth = as_ref(truth, "truth")?;
        let d = perturb_dictionary(&truth.0, epsilon0, seed)?;
        store(out, NoodlDictionary(d))
    })
}

/// Builds a dictionary from `n * m` column-major values. With `normalize`
/// the columns are scaled to unit norm, otherwise they must already be.
///
/// # Safety
/// `data` must point to `n * m` readable doubles and `out` be a valid output pointer.
#[no_mangle]
pub unsafe extern "C" fn noodl_dictionary_from_data(
    data: *const f64,
    n: usize,
    m: usize,
    normalize: bool,
    out: *mut *mut NoodlDictionary,
) -> NoodlStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n
            .checked_mul(m)
            .filter(|&l| l > 0)
            .ok_or_else(|| Fail(NoodlStatus::InvalidArgument, format!("invalid shape {n}x{m}")))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let mat = Array2::from_shape_vec((n, m).f(), values).map_err(|e| Fail(NoodlStatus::Shape, e.to_string()))?;
        let d = if normalize {
            Dictionary::normalized(mat)?
        } else {
            Dictionary::from_unit_columns(mat)?
        };
        store(out, NoodlDictionary(d))
    })
}

/// # Safety
/// `dict` must be a live handle; `n` and `m` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn noodl_dictionary_dims(
    dict: *const NoodlDictionary,
    n: *mut usize,
    m: *mut usize,
) -> NoodlStatus {
    guard(|| {
        let d = as_ref(dict, "dictionary")?;
        if !n.is_null() {
            *n = d.0.n();
        }
        if !m.is_null() {
            *m = d.0.m();
        }
        Ok(())
    })
}

/// Copies the atoms into `buf` in column-major order. `len` must be at least `n * m`.
///
/// # Safety
/// `dict` must be a live handle and `buf` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn noodl_dictionary_copy_data(
    dict: *const NoodlDictionary,
    buf: *mut f64,
    len: usize,
) -> NoodlStatus {
    guard(|| {
        let d = &as_ref(dict, "dictionary")?.0;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let need = d.n() * d.m();
        if len < need {
            return Err(Fail(
                NoodlStatus::InvalidArgument,
                format!("buffer holds {len} values, {need} needed"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (i, chunk) in dst.chunks_exact_mut(d.n()).enumerate() {
            chunk.copy_from_slice(d.atom_slice(i));
        }
        Ok(())
    })
}

/// Mutual incoherence `sqrt(n) * max_{i != j} |<A_i, A_j>|`.
///
/// # Safety
/// `dict` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn noodl_dictionary_incoherence(dict: *const NoodlDictionary, out: *mut f64) -> NoodlStatus {
    guard(|| {
        let d = as_ref(dict, "dictionary")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = incoherence(&d.0);
        Ok(())
    })
}

/// # Safety
/// `dict` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn noodl_dictionary_free(dict: *mut NoodlDictionary) {
    if !dict.is_null() {
        drop(Box::from_raw(dict));
    }
}

/// Runs `algorithm` on synthetic data drawn from `truth`. `config_json` is a
/// JSON object with `model` and `solver` entries (an experiment config
/// written by `noodl gen-config` is accepted as is). A run that stops on a
/// collapsed atom still succeeds; check [`noodl_run_termination`].
///
/// # Safety
/// `truth` must be a live handle, `config_json` a NUL-terminated string and
/// `out` a valid output pointer.
#[no_mangle]
pub unsafe extern "C" fn noodl_run(
    truth: *const NoodlDictionary,
    config_json: *const c_char,
    algorithm: NoodlAlgorithm,
    out: *mut *mut NoodlRun,
) -> NoodlStatus {
    guard(|| {
        let truth = as_ref(truth, "truth")?;
        if config_json.is_null() {
            return Err(null("config"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Fail(NoodlStatus::Config, format!("config is not UTF-8: {e}")))?;
        let cfg: RunConfig = serde_json::from_str(text).map_err(NoodlError::from)?;
        let alg = match algorithm {
            NoodlAlgorithm::Noodl => Algorithm::Noodl,
            NoodlAlgorithm::BiasedHt => Algorithm::BiasedHt,
        };
        let res = run_algorithm(alg, &truth.0, &cfg.model, &cfg.solver)?;
        store(out, NoodlRun(res))
    })
}

/// Number of recorded iterations; 0 for a NULL handle.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn noodl_run_trace_len(run: *const NoodlRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.trace.len())
}

/// # Safety
/// `run` must be a live handle and `row` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn noodl_run_trace_row(
    run: *const NoodlRun,
    index: usize,
    row: *mut NoodlTraceRow,
) -> NoodlStatus {
    guard(|| {
        let r = &as_ref(run, "run")?.0;
        if row.is_null() {
            return Err(null("row"));
        }
        let t = r.trace.get(index).ok_or_else(|| {
            Fail(
                NoodlStatus::InvalidArgument,
                format!("row {index} out of range (trace has {})", r.trace.len()),
            )
        })?;
        *row = NoodlTraceRow {
            t: t.t,
            max_col_err: t.max_col_err.unwrap_or(f64::NAN),
            rel_frob_a: t.rel_frob_a.unwrap_or(f64::NAN),
            rel_frob_x: t.rel_frob_x.unwrap_or(f64::NAN),
            fit: t.fit,
            support_acc: t.support_acc.unwrap_or(f64::NAN),
            wall_ms: t.wall_ms,
        };
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn noodl_run_termination(run: *const NoodlRun, out: *mut NoodlTermination) -> NoodlStatus {
    guard(|| {
        let r = &as_ref(run, "run")?.0;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = match r.termination {
            Termination::MaxIters => NoodlTermination::MaxIters,
            Termination::DictTol => NoodlTermination::DictTol,
            Termination::FitTol => NoodlTermination::FitTol,
            Termination::Degenerate => NoodlTermination::Degenerate,
            Termination::DataExhausted => NoodlTermination::DataExhausted,
        };
        Ok(())
    })
}

/// Copies the final dictionary into a new handle owned by the caller.
///
/// # Safety
/// `run` must be a live handle and `out` a valid output pointer.
#[no_mangle]
pub unsafe extern "C" fn noodl_run_dictionary(run: *const NoodlRun, out: *mut *mut NoodlDictionary) -> NoodlStatus {
    guard(|| {
        let r = &as_ref(run, "run")?.0;
        store(out, NoodlDictionary(r.dictionary.clone()))
    })
}

/// # Safety
/// `run` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn noodl_run_free(run: *mut NoodlRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
