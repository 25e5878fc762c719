//! C ABI over `sedkit`.
//!
//! Every fallible function returns a [`SedStatus`]; on failure the message is
//! kept per thread and read with [`sed_last_error`]. Objects are opaque
//! handles released with their `_free` function. Panics never cross the
//! boundary: they are reported as `SED_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sedkit::app::ExperimentConfig;
use sedkit::error::Error;
use sedkit::estimate::{mc_estimate, pce_estimate};
use sedkit::forecast::ForecastModel;
use sedkit::grid::{read_case, GridCase};
use sedkit::pce::{build_sparse_grid, MultiIndexSet, PceSurrogate};
use sedkit::sed::DispatchEvaluator;

/// Result codes. The numeric values of the error classes match the exit
/// codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SedStatus {
    Ok = 0,
    InvalidArgument = 1,
    ConfigError = 2,
    DataError = 3,
    NumericalError = 4,
    NullPointer = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SedStatus {
    match err.exit_code() {
        2 if matches!(err, Error::InvalidArgument(_)) => SedStatus::InvalidArgument,
        2 => SedStatus::ConfigError,
        3 => SedStatus::DataError,
        _ => SedStatus::NumericalError,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), SedStatus>) -> SedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SedStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SedStatus::Panic
        }
    }
}

fn fail(err: Error) -> SedStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null(what: &str) -> SedStatus {
    set_error(format!("{what} is null"));
    SedStatus::NullPointer
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, SedStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map(Path::new).map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        SedStatus::InvalidArgument
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SedStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, SedStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn germ_arg<'a>(germ: *const f64, len: usize) -> Result<&'a [f64], SedStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if germ.is_null() {
        return Err(null("germ"));
    }
    Ok(std::slice::from_raw_parts(germ, len))
}

/// A parsed dispatch case.
pub struct SedCase(GridCase);

/// The dispatch cost as a function of the forecast germ.
pub struct SedEvaluator(DispatchEvaluator);

/// A polynomial chaos surrogate.
pub struct SedSurrogate(PceSurrogate);

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sed_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and returns the full message length excluding the NUL.
/// Returns 0 when there is no message.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sed_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Number of chaos terms of total degree `<= order` in `dim` variables.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sed_basis_size(dim: usize, order: usize, out: *mut usize) -> SedStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = MultiIndexSet::total_degree(dim, order).map_err(fail)?.len();
        Ok(())
    })
}

/// Number of nodes of the level-`level` sparse grid in `dim` dimensions.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sed_sparse_grid_size(dim: usize, level: usize, out: *mut usize) -> SedStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = build_sparse_grid(dim, level).map_err(fail)?.len();
        Ok(())
    })
}

/// Reads a case file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sed_case_load(path: *const c_char, out: *mut *mut SedCase) -> SedStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let case = read_case(path_arg(path, "path")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(SedCase(case)));
        Ok(())
    })
}

/// # Safety
/// `case` must be null or a handle from [`sed_case_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sed_case_free(case: *mut SedCase) {
    if !case.is_null() {
        drop(Box::from_raw(case));
    }
}

/// Bus, line, thermal unit, renewable site and period counts; any output
/// pointer may be null.
///
/// # Safety
/// `case` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn sed_case_dimensions(
    case: *const SedCase,
    buses: *mut usize,
    lines: *mut usize,
    generators: *mut usize,
    renewables: *mut usize,
    periods: *mut usize,
) -> SedStatus {
    guard(|| {
        let c = &handle(case, "case")?.0;
        for (p, v) in [
            (buses, c.buses.len()),
            (lines, c.lines.len()),
            (generators, c.generators.len()),
            (renewables, c.renewables.len()),
            (periods, c.periods),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Builds the dispatch-cost model described by an experiment configuration
/// (its `[case]` and `[forecast]` sections).
///
/// # Safety
/// `config_path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sed_evaluator_from_config(
    config_path: *const c_char,
    out: *mut *mut SedEvaluator,
) -> SedStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = ExperimentConfig::load(path_arg(config_path, "config_path")?).map_err(fail)?;
        let case = cfg.load_case().map_err(fail)?;
        let model = ForecastModel::new(&cfg.forecast_spec(Some(&case)).map_err(fail)?).map_err(fail)?;
        let ev = DispatchEvaluator::new(case, model, &cfg.dispatch_options()).map_err(fail)?;
        *out = Box::into_raw(Box::new(SedEvaluator(ev)));
        Ok(())
    })
}

/// # Safety
/// `ev` must be null or a live evaluator handle.
#[no_mangle]
pub unsafe extern "C" fn sed_evaluator_free(ev: *mut SedEvaluator) {
    if !ev.is_null() {
        drop(Box::from_raw(ev));
    }
}

/// Germ dimension.
///
/// # Safety
/// `ev` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sed_evaluator_dims(ev: *const SedEvaluator, out: *mut usize) -> SedStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(ev, "evaluator")?.0.forecast().dims();
        Ok(())
    })
}

/// Optimal dispatch cost for one germ of length `len`.
///
/// # Safety
/// `ev` must be a live handle, `germ` valid for `len` reads, `cost` valid.
#[no_mangle]
pub unsafe extern "C" fn sed_evaluator_eval(
    ev: *const SedEvaluator,
    germ: *const f64,
    len: usize,
    cost: *mut f64,
) -> SedStatus {
    guard(|| {
        let ev = handle(ev, "evaluator")?;
        let germ = germ_arg(germ, len)?;
        let cost = out_arg(cost, "cost")?;
        *cost = ev.0.evaluate(germ).map_err(fail)?;
        Ok(())
    })
}

/// Monte Carlo estimate of the expected cost from `samples` germs.
///
/// # Safety
/// `ev` must be a live handle; `mean` and `stderr` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sed_mc_estimate(
    ev: *const SedEvaluator,
    samples: usize,
    seed: u64,
    mean: *mut f64,
    stderr: *mut f64,
) -> SedStatus {
    guard(|| {
        let ev = handle(ev, "evaluator")?;
        let mean = out_arg(mean, "mean")?;
        let stderr = out_arg(stderr, "stderr")?;
        let m = mc_estimate(&ev.0, samples, seed).map_err(fail)?;
        *mean = m.mean;
        *stderr = m.stderr;
        Ok(())
    })
}

/// Order-`order` chaos surrogate projected on the level-`level` sparse grid;
/// `nodes` (may be null) receives the number of model evaluations.
///
/// # Safety
/// `ev` must be a live handle; `out` valid; `nodes` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sed_pce_build(
    ev: *const SedEvaluator,
    level: usize,
    order: usize,
    nodes: *mut usize,
    out: *mut *mut SedSurrogate,
) -> SedStatus {
    guard(|| {
        let ev = handle(ev, "evaluator")?;
        let out = out_arg(out, "out")?;
        let est = pce_estimate(&ev.0, level, order).map_err(fail)?;
        if let Some(n) = nodes.as_mut() {
            *n = est.nodes;
        }
        *out = Box::into_raw(Box::new(SedSurrogate(est.surrogate)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live surrogate handle.
#[no_mangle]
pub unsafe extern "C" fn sed_surrogate_free(s: *mut SedSurrogate) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Mean (`c_0`) and variance of the surrogate; either output may be null.
///
/// # Safety
/// `s` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn sed_surrogate_moments(
    s: *const SedSurrogate,
    mean: *mut f64,
    variance: *mut f64,
) -> SedStatus {
    guard(|| {
        let s = &handle(s, "surrogate")?.0;
        if let Some(m) = mean.as_mut() {
            *m = s.mean();
        }
        if let Some(v) = variance.as_mut() {
            *v = s.variance();
        }
        Ok(())
    })
}

/// Evaluates the surrogate at a germ of length `len`.
///
/// # Safety
/// `s` must be a live handle, `germ` valid for `len` reads, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sed_surrogate_eval(
    s: *const SedSurrogate,
    germ: *const f64,
    len: usize,
    out: *mut f64,
) -> SedStatus {
    guard(|| {
        let s = handle(s, "surrogate")?;
        let germ = germ_arg(germ, len)?;
        let out = out_arg(out, "out")?;
        *out = s.0.eval(germ).map_err(fail)?;
        Ok(())
    })
}

/// Number of chaos coefficients.
///
/// # Safety
/// `s` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sed_surrogate_len(s: *const SedSurrogate, out: *mut usize) -> SedStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(s, "surrogate")?.0.coefficients.len();
        Ok(())
    })
}

/// Copies up to `len` coefficients into `buf` in basis order.
///
/// # Safety
/// `s` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sed_surrogate_coefficients(s: *const SedSurrogate, buf: *mut f64, len: usize) -> SedStatus {
    guard(|| {
        let c = &handle(s, "surrogate")?.0.coefficients;
        if len > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            let n = len.min(c.len());
            ptr::copy_nonoverlapping(c.as_ptr(), buf, n);
        }
        Ok(())
    })
}
