//! C ABI over the bartforge sampler.
//!
//! A fitted model is an opaque `BfModel` handle owned by the caller and
//! released with `bf_model_free`. Every fallible function returns a
//! `BfStatus`; on failure `bf_last_error` describes the most recent error
//! of the calling thread. Matrices are row-major `n x p` arrays of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bartforge::container::{load_trace, save_trace};
use bartforge::interface::{fit, predict, FitConfig, Trace};
use bartforge::{Error, GridScheme};
use ndarray::ArrayView2;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateData = 3,
    MissingForests = 4,
    Io = 5,
    Format = 6,
    Panic = 7,
}

/// Fit settings; start from `bf_fit_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BfFitConfig {
    pub n_trees: u32,
    pub n_burn: u32,
    pub n_kept: u32,
    pub thinning: u32,
    pub max_depth: u8,
    /// Cutpoints per axis of a uniform grid; 0 selects the midpoint grid.
    pub cutpoints: u8,
    pub n_chains: u32,
    pub seed: u64,
    pub k: f64,
    pub q: f64,
    pub nu: f64,
    /// Nonzero retains forests so `bf_predict` works on new data.
    pub keep_forests: u8,
}

/// Fitted model: posterior draws and, optionally, the forests behind them.
pub struct BfModel {
    trace: Trace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BfStatus {
    match e {
        Error::Config(_) | Error::Shape(_) | Error::Usage(_) | Error::Data(_) => BfStatus::InvalidArgument,
        Error::DegenerateScale | Error::DegenerateGrid => BfStatus::DegenerateData,
        Error::MissingForests => BfStatus::MissingForests,
        Error::Io(_) | Error::Csv(_) => BfStatus::Io,
        Error::Format(_) => BfStatus::Format,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (BfStatus, String)>) -> BfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BfStatus::Panic
        }
    }
}

fn lift(e: Error) -> (BfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BfStatus, String) {
    (BfStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or point to `n * p` readable doubles.
unsafe fn matrix<'a>(ptr: *const f64, n: usize, p: usize, what: &str) -> Result<ArrayView2<'a, f64>, (BfStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    let len = n.checked_mul(p).ok_or((BfStatus::InvalidArgument, format!("{what} is too large")))?;
    let data = std::slice::from_raw_parts(ptr, len);
    ArrayView2::from_shape((n, p), data).map_err(|e| (BfStatus::InvalidArgument, e.to_string()))
}

/// # Safety
/// `path` must be null or a NUL-terminated string.
unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, (BfStatus, String)> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| (BfStatus::InvalidArgument, "path is not UTF-8".into()))
}

/// Default settings: 200 trees, 1000 burn-in and 1000 kept draws, depth 6,
/// 100 uniform cutpoints, 2 chains, k = 2, q = 0.9, nu = 3, forests kept.
#[no_mangle]
pub extern "C" fn bf_fit_config_default() -> BfFitConfig {
    let d = FitConfig::default();
    BfFitConfig {
        n_trees: d.n_trees as u32,
        n_burn: d.n_burn as u32,
        n_kept: d.n_kept as u32,
        thinning: d.thinning as u32,
        max_depth: d.max_depth,
        cutpoints: 100,
        n_chains: d.n_chains as u32,
        seed: d.seed,
        k: d.k,
        q: d.q,
        nu: d.nu,
        keep_forests: 1,
    }
}

fn to_config(c: &BfFitConfig) -> FitConfig {
    FitConfig {
        n_trees: c.n_trees as usize,
        n_burn: c.n_burn as usize,
        n_kept: c.n_kept as usize,
        thinning: c.thinning as usize,
        max_depth: c.max_depth,
        grid: match c.cutpoints {
            0 => GridScheme::Midpoints,
            k => GridScheme::Uniform(k),
        },
        seed: c.seed,
        k: c.k,
        q: c.q,
        nu: c.nu,
        n_chains: c.n_chains as usize,
        keep_forests: c.keep_forests != 0,
        ..FitConfig::default()
    }
}

/// Fits a model to `n` rows of `p` predictors `x` and responses `y`.
///
/// # Safety
/// `x` must point to `n * p` doubles, `y` to `n` doubles, `config` to a
/// valid config and `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn bf_fit(
    x: *const f64,
    y: *const f64,
    n: usize,
    p: usize,
    config: *const BfFitConfig,
    out: *mut *mut BfModel,
) -> BfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if config.is_null() {
            return Err(null("config"));
        }
        if y.is_null() {
            return Err(null("y"));
        }
        let xv = matrix(x, n, p, "x")?;
        let yv = std::slice::from_raw_parts(y, n);
        let trace = fit(xv, yv, None, &to_config(&*config)).map_err(lift)?;
        *out = Box::into_raw(Box::new(BfModel { trace }));
        Ok(())
    })
}

/// Posterior mean and sd of the function at `n` new rows. Requires a model
/// fitted with `keep_forests`.
///
/// # Safety
/// `model` must be a live handle, `x` must point to `n * p` doubles and
/// `mean` and `sd` to `n` writable doubles each (`sd` may be null).
#[no_mangle]
pub unsafe extern "C" fn bf_predict(
    model: *const BfModel,
    x: *const f64,
    n: usize,
    p: usize,
    mean: *mut f64,
    sd: *mut f64,
) -> BfStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if mean.is_null() {
            return Err(null("mean"));
        }
        let xv = matrix(x, n, p, "x")?;
        let summary = predict(&model.trace, xv).map_err(lift)?.summarize(0.95);
        let mean = std::slice::from_raw_parts_mut(mean, n);
        for (m, s) in mean.iter_mut().zip(&summary) {
            *m = s.mean;
        }
        if !sd.is_null() {
            let sd = std::slice::from_raw_parts_mut(sd, n);
            for (d, s) in sd.iter_mut().zip(&summary) {
                *d = s.sd;
            }
        }
        Ok(())
    })
}

/// Posterior mean of the function at the training rows.
///
/// # Safety
/// `model` must be a live handle and `mean` must point to
/// `bf_model_n_train(model)` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bf_train_mean(model: *const BfModel, mean: *mut f64) -> BfStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if mean.is_null() {
            return Err(null("mean"));
        }
        let m = model.trace.train_prediction().mean();
        std::slice::from_raw_parts_mut(mean, m.len()).copy_from_slice(&m);
        Ok(())
    })
}

/// Number of training rows, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_model_n_train(model: *const BfModel) -> usize {
    model.as_ref().map_or(0, |m| m.trace.n_train)
}

/// Total kept draws over all chains, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_model_n_draws(model: *const BfModel) -> usize {
    model.as_ref().map_or(0, |m| m.trace.n_draws())
}

/// Writes the model as a trace container.
///
/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bf_model_save(model: *const BfModel, path: *const c_char) -> BfStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        save_trace(path_arg(path)?, &model.trace).map_err(lift)
    })
}

/// Reads a trace container into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable storage for
/// one handle.
#[no_mangle]
pub unsafe extern "C" fn bf_model_load(path: *const c_char, out: *mut *mut BfModel) -> BfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let trace = load_trace(path_arg(path)?).map_err(lift)?;
        *out = Box::into_raw(Box::new(BfModel { trace }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bf_model_free(model: *mut BfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Message of the calling thread's last error, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
