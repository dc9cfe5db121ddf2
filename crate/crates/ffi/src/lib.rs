//! C interface to `eerf`.
//!
//! Objects cross the boundary as opaque handles created by `eerf_*_new`,
//! `eerf_*_load` or `eerf_*_sample` style calls and released with the
//! matching `eerf_*_free`. Every fallible function returns an
//! [`EerfStatus`]; on failure a description is available from
//! [`eerf_last_error`] on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use eerf::data::{bandwidth_heuristic, load_dataset, standardize, BandwidthConfig, DataFormat, Dataset, LoadOptions, Task};
use eerf::features::{sample_features, CosineSampler, FeatureSpec, RandomFeature};
use eerf::selection::{eerf_select, rks_select, score_responses};
use eerf::training::{evaluate, fit_model, predict, tune_regularization, LinearModel, TrainConfig};
use eerf::Error;
use ndarray::{Array1, Array2};

pub const EERF_TASK_REGRESSION: i32 = 0;
pub const EERF_TASK_CLASSIFICATION: i32 = 1;

pub const EERF_FORMAT_CSV: i32 = 0;
pub const EERF_FORMAT_LIBSVM: i32 = 1;

pub const EERF_SAMPLER_GAUSSIAN: i32 = 0;
pub const EERF_SAMPLER_LAPLACE: i32 = 1;
pub const EERF_SAMPLER_CAUCHY: i32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EerfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Parse = 4,
    DimensionMismatch = 5,
    Convergence = 6,
    Io = 7,
    Panic = 8,
}

/// A dataset (inputs, responses and task).
pub struct EerfDataset(Dataset);

/// An ordered list of random features.
pub struct EerfFeatures(Vec<RandomFeature>);

/// A fitted linear model over a feature list.
pub struct EerfModel(LinearModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EerfStatus {
    match e {
        Error::Domain(_) | Error::Config(_) => EerfStatus::Domain,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => EerfStatus::Parse,
        Error::DimensionMismatch { .. } => EerfStatus::DimensionMismatch,
        Error::Convergence { .. } => EerfStatus::Convergence,
        Error::Io(_) => EerfStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> EerfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EerfStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            EerfStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            EerfStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EerfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn view<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out_slot<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn task_of(task: i32) -> Result<Task, Fail> {
    match task {
        EERF_TASK_REGRESSION => Ok(Task::Regression),
        EERF_TASK_CLASSIFICATION => Ok(Task::Classification),
        t => Err(Fail::Arg(format!("unknown task code {t}"))),
    }
}

fn matrix(data: &[f64], rows: usize, cols: usize) -> Result<Array2<f64>, Fail> {
    let len = rows.checked_mul(cols).ok_or_else(|| Fail::Arg("matrix size overflows".into()))?;
    if data.len() != len {
        return Err(Fail::Arg("matrix buffer has the wrong length".into()));
    }
    Array2::from_shape_vec((rows, cols), data.to_vec()).map_err(|e| Fail::Arg(e.to_string()))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn eerf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eerf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a dataset from a row-major `n_rows × n_cols` matrix and `n_rows`
/// responses.
#[no_mangle]
pub unsafe extern "C" fn eerf_dataset_new(
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    y: *const f64,
    task: i32,
    out: *mut *mut EerfDataset,
) -> EerfStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let len = n_rows.checked_mul(n_cols).ok_or_else(|| Fail::Arg("matrix size overflows".into()))?;
        let x = matrix(view(x, len, "x")?, n_rows, n_cols)?;
        let y = Array1::from(view(y, n_rows, "y")?.to_vec());
        *out = boxed(EerfDataset(Dataset::new(x, y, task_of(task)?)?));
        Ok(())
    })
}

/// Reads a CSV or libsvm file. `n_features = 0` infers the libsvm width.
#[no_mangle]
pub unsafe extern "C" fn eerf_dataset_load(
    path: *const c_char,
    format: i32,
    task: i32,
    n_features: usize,
    out: *mut *mut EerfDataset,
) -> EerfStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail::Arg("path is not valid UTF-8".into()))?;
        let format = match format {
            EERF_FORMAT_CSV => DataFormat::Csv,
            EERF_FORMAT_LIBSVM => DataFormat::Libsvm,
            f => return Err(Fail::Arg(format!("unknown format code {f}"))),
        };
        let opts = LoadOptions {
            n_features: (n_features > 0).then_some(n_features),
        };
        *out = boxed(EerfDataset(load_dataset(Path::new(path), format, task_of(task)?, &opts)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn eerf_dataset_free(ds: *mut EerfDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

#[no_mangle]
pub unsafe extern "C" fn eerf_dataset_shape(ds: *const EerfDataset, n_rows: *mut usize, n_cols: *mut usize) -> EerfStatus {
    guard(|| {
        let ds = &deref(ds, "ds")?.0;
        *out_slot(n_rows, "n_rows")? = ds.n_rows();
        *out_slot(n_cols, "n_cols")? = ds.n_cols();
        Ok(())
    })
}

/// Copies the (row-major) inputs into `x` (length `n_rows · n_cols`) and
/// the responses into `y` (length `n_rows`). Either buffer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn eerf_dataset_copy(ds: *const EerfDataset, x: *mut f64, y: *mut f64) -> EerfStatus {
    guard(|| {
        let ds = &deref(ds, "ds")?.0;
        if !x.is_null() {
            let dst = slice::from_raw_parts_mut(x, ds.n_rows() * ds.n_cols());
            for (d, s) in dst.iter_mut().zip(ds.x().iter()) {
                *d = *s;
            }
        }
        if !y.is_null() {
            slice::from_raw_parts_mut(y, ds.n_rows()).copy_from_slice(ds.y().as_slice().expect("contiguous"));
        }
        Ok(())
    })
}

/// Standardizes `train` and applies the same transform to `test` (which may
/// be NULL, in which case `test_out` is left untouched).
#[no_mangle]
pub unsafe extern "C" fn eerf_dataset_standardize(
    train: *const EerfDataset,
    test: *const EerfDataset,
    train_out: *mut *mut EerfDataset,
    test_out: *mut *mut EerfDataset,
) -> EerfStatus {
    guard(|| {
        let train = &deref(train, "train")?.0;
        let train_out = out_slot(train_out, "train_out")?;
        let (std_train, params) = standardize(train)?;
        if let Some(test) = test.as_ref() {
            let test_out = out_slot(test_out, "test_out")?;
            *test_out = boxed(EerfDataset(params.apply(&test.0)?));
        }
        *train_out = boxed(EerfDataset(std_train));
        Ok(())
    })
}

/// Mean distance to the `k`-th nearest neighbour over a seeded probe of
/// `probe_size` rows.
#[no_mangle]
pub unsafe extern "C" fn eerf_bandwidth_heuristic(
    ds: *const EerfDataset,
    k: usize,
    probe_size: usize,
    seed: u64,
    sigma: *mut f64,
) -> EerfStatus {
    guard(|| {
        let ds = &deref(ds, "ds")?.0;
        *out_slot(sigma, "sigma")? = bandwidth_heuristic(ds, &BandwidthConfig { k, probe_size, seed })?;
        Ok(())
    })
}

fn sample_into(spec: Result<FeatureSpec, Error>, m0: usize, seed: u64, out: *mut *mut EerfFeatures) -> EerfStatus {
    guard(|| {
        let out = unsafe { out_slot(out, "out")? };
        *out = boxed(EerfFeatures(sample_features(&spec?, m0, seed)?));
        Ok(())
    })
}

/// `m0` cosine features for inputs of width `dim`.
#[no_mangle]
pub unsafe extern "C" fn eerf_features_sample_cosine(
    sampler: i32,
    bandwidth: f64,
    dim: usize,
    m0: usize,
    seed: u64,
    out: *mut *mut EerfFeatures,
) -> EerfStatus {
    let sampler = match sampler {
        EERF_SAMPLER_GAUSSIAN => CosineSampler::Gaussian,
        EERF_SAMPLER_LAPLACE => CosineSampler::Laplace,
        EERF_SAMPLER_CAUCHY => CosineSampler::Cauchy,
        s => return guard(|| Err(Fail::Arg(format!("unknown sampler code {s}")))),
    };
    sample_into(FeatureSpec::cosine(sampler, bandwidth, dim), m0, seed, out)
}

#[no_mangle]
pub unsafe extern "C" fn eerf_features_sample_arccosine(
    order: u32,
    dim: usize,
    m0: usize,
    seed: u64,
    out: *mut *mut EerfFeatures,
) -> EerfStatus {
    sample_into(FeatureSpec::arccosine(order, dim), m0, seed, out)
}

#[no_mangle]
pub unsafe extern "C" fn eerf_features_sample_linear(dim: usize, m0: usize, seed: u64, out: *mut *mut EerfFeatures) -> EerfStatus {
    sample_into(FeatureSpec::linear(dim), m0, seed, out)
}

#[no_mangle]
pub unsafe extern "C" fn eerf_features_free(fs: *mut EerfFeatures) {
    if !fs.is_null() {
        drop(Box::from_raw(fs));
    }
}

#[no_mangle]
pub unsafe extern "C" fn eerf_features_len(fs: *const EerfFeatures, len: *mut usize) -> EerfStatus {
    guard(|| {
        *out_slot(len, "len")? = deref(fs, "features")?.0.len();
        Ok(())
    })
}

/// Writes the 1-based sampling positions of the features into `out`
/// (length `eerf_features_len`).
#[no_mangle]
pub unsafe extern "C" fn eerf_features_source_indices(fs: *const EerfFeatures, out: *mut usize, len: usize) -> EerfStatus {
    guard(|| {
        let fs = &deref(fs, "features")?.0;
        if len != fs.len() {
            return Err(Fail::Arg(format!("buffer holds {len} entries, need {}", fs.len())));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let dst = slice::from_raw_parts_mut(out, len);
        for (d, f) in dst.iter_mut().zip(fs) {
            *d = f.source_index;
        }
        Ok(())
    })
}

fn responses(ds: &Dataset, center: bool) -> Array1<f64> {
    let y = ds.y();
    if center {
        let mean = y.mean().unwrap_or(0.0);
        y.mapv(|v| v - mean)
    } else {
        y.clone()
    }
}

/// Empirical scores `(1/N) Σ yⁿ φ(xⁿ, ω)`, one per feature, into `scores`
/// (length `len`, equal to the feature count). With `center` non-zero the
/// mean response is subtracted first.
#[no_mangle]
pub unsafe extern "C" fn eerf_features_score(
    fs: *const EerfFeatures,
    ds: *const EerfDataset,
    center: i32,
    scores: *mut f64,
    len: usize,
) -> EerfStatus {
    guard(|| {
        let fs = &deref(fs, "features")?.0;
        let ds = &deref(ds, "ds")?.0;
        if len != fs.len() {
            return Err(Fail::Arg(format!("buffer holds {len} entries, need {}", fs.len())));
        }
        if scores.is_null() {
            return Err(Fail::Null("scores"));
        }
        let y = responses(ds, center != 0);
        let table = score_responses(fs, ds.x().view(), y.view())?;
        slice::from_raw_parts_mut(scores, len).copy_from_slice(&table.scores());
        Ok(())
    })
}

/// The `m` features with the largest `|score|` on `ds`, in descending order.
#[no_mangle]
pub unsafe extern "C" fn eerf_features_select_eerf(
    fs: *const EerfFeatures,
    ds: *const EerfDataset,
    m: usize,
    center: i32,
    out: *mut *mut EerfFeatures,
) -> EerfStatus {
    guard(|| {
        let fs = &deref(fs, "features")?.0;
        let ds = &deref(ds, "ds")?.0;
        let out = out_slot(out, "out")?;
        let y = responses(ds, center != 0);
        let table = score_responses(fs, ds.x().view(), y.view())?;
        *out = boxed(EerfFeatures(eerf_select(&table, m)?));
        Ok(())
    })
}

/// The first `m` features.
#[no_mangle]
pub unsafe extern "C" fn eerf_features_select_rks(fs: *const EerfFeatures, m: usize, out: *mut *mut EerfFeatures) -> EerfStatus {
    guard(|| {
        let fs = &deref(fs, "features")?.0;
        let out = out_slot(out, "out")?;
        *out = boxed(EerfFeatures(rks_select(fs, m)?));
        Ok(())
    })
}

/// Fits a model with fixed regularization (squared loss for regression,
/// logistic for classification).
#[no_mangle]
pub unsafe extern "C" fn eerf_model_fit(
    ds: *const EerfDataset,
    fs: *const EerfFeatures,
    lambda_reg: f64,
    out: *mut *mut EerfModel,
) -> EerfStatus {
    guard(|| {
        let ds = &deref(ds, "ds")?.0;
        let fs = &deref(fs, "features")?.0;
        let out = out_slot(out, "out")?;
        let cfg = TrainConfig::for_task(ds.task());
        *out = boxed(EerfModel(fit_model(ds, fs, lambda_reg, &cfg)?));
        Ok(())
    })
}

/// Picks λ from `grid` (or the default `{1e-5, …, 1e5}` when `grid` is NULL)
/// by error on `val`, returning the model fitted on `train`.
#[no_mangle]
pub unsafe extern "C" fn eerf_model_tune(
    train: *const EerfDataset,
    val: *const EerfDataset,
    fs: *const EerfFeatures,
    grid: *const f64,
    grid_len: usize,
    lambda_out: *mut f64,
    out: *mut *mut EerfModel,
) -> EerfStatus {
    guard(|| {
        let train = &deref(train, "train")?.0;
        let val = &deref(val, "val")?.0;
        let fs = &deref(fs, "features")?.0;
        let out = out_slot(out, "out")?;
        let mut cfg = TrainConfig::for_task(train.task());
        if !grid.is_null() {
            cfg.reg_grid = view(grid, grid_len, "grid")?.to_vec();
        }
        let (lambda, model) = tune_regularization(train, val, &cfg, fs)?;
        if let Some(l) = lambda_out.as_mut() {
            *l = lambda;
        }
        *out = boxed(EerfModel(model));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn eerf_model_free(model: *mut EerfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of weights (selected features) in the model.
#[no_mangle]
pub unsafe extern "C" fn eerf_model_len(model: *const EerfModel, len: *mut usize) -> EerfStatus {
    guard(|| {
        *out_slot(len, "len")? = deref(model, "model")?.0.theta.len();
        Ok(())
    })
}

/// Predictions for a row-major `n_rows × n_cols` matrix into `out`
/// (length `n_rows`): raw scores for regression, ±1 for classification.
#[no_mangle]
pub unsafe extern "C" fn eerf_model_predict(
    model: *const EerfModel,
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
) -> EerfStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let len = n_rows.checked_mul(n_cols).ok_or_else(|| Fail::Arg("matrix size overflows".into()))?;
        let x = matrix(view(x, len, "x")?, n_rows, n_cols)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let pred = predict(model, &x)?;
        slice::from_raw_parts_mut(out, n_rows).copy_from_slice(pred.as_slice().expect("contiguous"));
        Ok(())
    })
}

/// Error percentage of `pred` against `y`: misclassification rate for
/// classification, RMSE for regression, both times 100.
#[no_mangle]
pub unsafe extern "C" fn eerf_evaluate(pred: *const f64, y: *const f64, n: usize, task: i32, error_pct: *mut f64) -> EerfStatus {
    guard(|| {
        let pred = Array1::from(view(pred, n, "pred")?.to_vec());
        let y = Array1::from(view(y, n, "y")?.to_vec());
        *out_slot(error_pct, "error_pct")? = evaluate(pred.view(), y.view(), task_of(task)?)?;
        Ok(())
    })
}
