//! C ABI over `lime-stability`.
//!
//! Objects cross the boundary as opaque pointers created by `ls_*_new`
//! style functions and released with the matching `ls_*_free`. Fallible
//! calls return an [`LsStatus`]; the message of the most recent failure on
//! the calling thread is available from [`ls_last_error_message`].
//!
//! Strings returned by the library (`ls_*_to_json`) are owned by the caller
//! and must be released with [`ls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Mutex;

use nalgebra::DMatrix;

use lime_stability::blackbox::{parse_predictor, ExternalOptions, Predictor};
use lime_stability::config::{default_kernel_width, ExplainerConfig};
use lime_stability::error::{ConfigError, Error, ErrorClass, PredictorError};
use lime_stability::explainer::{Explainer, Explanation, SeedMode};
use lime_stability::model::StabilityReport;
use lime_stability::{infer_feature_stats, load_dataset, FeatureStats};

/// Result of every fallible call. Values 2 to 6 match the `limestab`
/// process exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    Config = 2,
    Data = 3,
    Predictor = 4,
    Numeric = 5,
    Io = 6,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 7,
    /// An index argument was out of range.
    OutOfRange = 8,
    /// Rust code panicked; the library state is unchanged but the call did
    /// nothing.
    Panic = 9,
}

impl From<ErrorClass> for LsStatus {
    fn from(c: ErrorClass) -> Self {
        match c {
            ErrorClass::Config => LsStatus::Config,
            ErrorClass::Data => LsStatus::Data,
            ErrorClass::Predictor => LsStatus::Predictor,
            ErrorClass::Numeric => LsStatus::Numeric,
            ErrorClass::Io => LsStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: LsStatus, msg: impl Into<String>) -> LsStatus {
    set_last_error(msg);
    status
}

fn fail_with(e: Error) -> LsStatus {
    fail(e.class().into(), e.to_string())
}

/// Runs `f`, converting panics into [`LsStatus::Panic`].
fn guard(f: impl FnOnce() -> LsStatus) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(LsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, LsStatus> {
    if p.is_null() {
        return Err(fail(LsStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], LsStatus> {
    if p.is_null() {
        return Err(fail(LsStatus::NullArgument, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

macro_rules! non_null {
    ($p:expr, $what:literal) => {
        match $p {
            Some(v) => v,
            None => return fail(LsStatus::NullArgument, concat!($what, " is null")),
        }
    };
}

macro_rules! try_ls {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

fn into_handle<T>(value: T, out: *mut *mut T) -> LsStatus {
    // SAFETY: callers check `out` before building `value`.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    LsStatus::Ok
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn json_string<T: serde::Serialize>(value: &T) -> *mut c_char {
    match serde_json::to_string(value) {
        Ok(s) => CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut()),
        Err(e) => {
            set_last_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from an `ls_*` function and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------- config

/// Tunables of an explanation. Obtain defaults from [`ls_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsConfig {
    pub num_samples: usize,
    pub num_features: usize,
    pub kernel_width: f64,
    pub ridge_penalty: f64,
    pub repeats: usize,
    pub master_seed: u64,
    pub include_query_point: bool,
    pub unweighted_selection: bool,
}

impl From<LsConfig> for ExplainerConfig {
    fn from(c: LsConfig) -> Self {
        ExplainerConfig {
            num_samples: c.num_samples,
            num_features: c.num_features,
            kernel_width: c.kernel_width,
            ridge_penalty: c.ridge_penalty,
            repeats: c.repeats,
            master_seed: c.master_seed,
            include_query_point: c.include_query_point,
            unweighted_selection: c.unweighted_selection,
        }
    }
}

/// Default settings for a model over `dims` features.
#[no_mangle]
pub extern "C" fn ls_config_default(dims: usize) -> LsConfig {
    let c = ExplainerConfig::for_dims(dims);
    LsConfig {
        num_samples: c.num_samples,
        num_features: c.num_features,
        kernel_width: default_kernel_width(dims),
        ridge_penalty: c.ridge_penalty,
        repeats: c.repeats,
        master_seed: c.master_seed,
        include_query_point: c.include_query_point,
        unweighted_selection: c.unweighted_selection,
    }
}

// ----------------------------------------------------------------- stats

/// Per-feature sampling means and standard deviations.
pub struct LsStats {
    stats: FeatureStats,
    names: Vec<String>,
}

/// Builds statistics from `dims` means and standard deviations.
///
/// # Safety
/// `means` and `stds` must point to `dims` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ls_stats_new(
    means: *const f64,
    stds: *const f64,
    dims: usize,
    out: *mut *mut LsStats,
) -> LsStatus {
    guard(|| {
        if out.is_null() {
            return fail(LsStatus::NullArgument, "out is null");
        }
        let means = try_ls!(slice_arg(means, dims, "means"));
        let stds = try_ls!(slice_arg(stds, dims, "stds"));
        let stats = match FeatureStats::new(means.to_vec(), stds.to_vec()) {
            Ok(s) => s,
            Err(e) => return fail_with(e.into()),
        };
        let names = (0..dims).map(|j| format!("x{j}")).collect();
        into_handle(LsStats { stats, names }, out)
    })
}

/// Infers statistics from a CSV file. `target_column` may be null.
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_stats_from_csv(
    path: *const c_char,
    target_column: *const c_char,
    out: *mut *mut LsStats,
) -> LsStatus {
    guard(|| {
        if out.is_null() {
            return fail(LsStatus::NullArgument, "out is null");
        }
        let path = try_ls!(str_arg(path, "path"));
        let target = if target_column.is_null() {
            None
        } else {
            Some(try_ls!(str_arg(target_column, "target_column")))
        };
        let ds = match load_dataset(path, target) {
            Ok(d) => d,
            Err(e) => return fail_with(e.into()),
        };
        let stats = infer_feature_stats(&ds);
        into_handle(
            LsStats {
                stats,
                names: ds.feature_names().to_vec(),
            },
            out,
        )
    })
}

/// # Safety
/// `stats` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_stats_dims(stats: *const LsStats) -> usize {
    stats.as_ref().map_or(0, |s| s.stats.dims())
}

/// # Safety
/// `stats` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_stats_free(stats: *mut LsStats) {
    free_handle(stats)
}

// ------------------------------------------------------------- predictor

/// Scores `rows` points stored row-major in `points` (`rows * cols`
/// doubles), writing `rows` values to `out`. Returns 0 on success.
pub type LsPredictFn = Option<
    unsafe extern "C" fn(user_data: *mut c_void, points: *const f64, rows: usize, cols: usize, out: *mut f64) -> c_int,
>;

type PredictFnPtr =
    unsafe extern "C" fn(user_data: *mut c_void, points: *const f64, rows: usize, cols: usize, out: *mut f64) -> c_int;

struct CallbackPredictor {
    func: PredictFnPtr,
    user_data: *mut c_void,
    dims: usize,
    // one call at a time, so C callbacks need not be thread-safe
    lock: Mutex<()>,
}

// SAFETY: `user_data` is only touched by the callback, and calls are
// serialized through `lock`.
unsafe impl Send for CallbackPredictor {}
unsafe impl Sync for CallbackPredictor {}

impl Predictor for CallbackPredictor {
    fn dims(&self) -> Option<usize> {
        Some(self.dims)
    }

    fn predict_rows(&self, points: &DMatrix<f64>) -> Result<Vec<f64>, PredictorError> {
        let (rows, cols) = points.shape();
        let row_major: Vec<f64> = points.transpose().as_slice().to_vec();
        let mut out = vec![f64::NAN; rows];
        let _held = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        // SAFETY: buffers are sized as documented on `LsPredictFn`.
        let rc = unsafe { (self.func)(self.user_data, row_major.as_ptr(), rows, cols, out.as_mut_ptr()) };
        if rc != 0 {
            return Err(PredictorError::BadSpec {
                spec: "callback".into(),
                reason: format!("callback returned {rc}"),
            });
        }
        Ok(out)
    }

    fn descriptor(&self) -> String {
        "callback".into()
    }
}

pub struct LsPredictor {
    inner: Box<dyn Predictor>,
}

/// Creates a predictor from a descriptor: `builtin:<spec>` or
/// `cmd:<program and arguments>`. `dims` is the feature count announced to
/// external processes.
///
/// # Safety
/// `descriptor` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_predictor_new(
    descriptor: *const c_char,
    dims: usize,
    out: *mut *mut LsPredictor,
) -> LsStatus {
    guard(|| {
        if out.is_null() {
            return fail(LsStatus::NullArgument, "out is null");
        }
        let d = try_ls!(str_arg(descriptor, "descriptor"));
        match parse_predictor(d, ExternalOptions::new(dims)) {
            Ok(inner) => into_handle(LsPredictor { inner }, out),
            Err(e) => fail_with(e.into()),
        }
    })
}

/// Wraps a C scoring function over `dims` features. The callback is never
/// invoked concurrently, but may be invoked from threads other than the
/// caller's.
///
/// # Safety
/// `user_data` must stay valid while the predictor lives; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ls_predictor_from_callback(
    func: LsPredictFn,
    user_data: *mut c_void,
    dims: usize,
    out: *mut *mut LsPredictor,
) -> LsStatus {
    guard(|| {
        if out.is_null() {
            return fail(LsStatus::NullArgument, "out is null");
        }
        let Some(func) = func else {
            return fail(LsStatus::NullArgument, "func is null");
        };
        if dims == 0 {
            return fail_with(ConfigError::ZeroFeatures.into());
        }
        let inner = Box::new(CallbackPredictor {
            func,
            user_data,
            dims,
            lock: Mutex::new(()),
        });
        into_handle(LsPredictor { inner }, out)
    })
}

/// # Safety
/// `predictor` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_predictor_free(predictor: *mut LsPredictor) {
    free_handle(predictor)
}

// ----------------------------------------------------------- explanation

pub struct LsExplanation {
    inner: Explanation,
}

/// One selected feature of an explanation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LsContribution {
    pub feature_index: usize,
    pub coefficient: f64,
    pub raw_coefficient: f64,
    pub variance: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub contribution: f64,
}

unsafe fn explainer_inputs<'a>(
    predictor: *const LsPredictor,
    stats: *const LsStats,
    point: *const f64,
    config: *const LsConfig,
) -> Result<(&'a LsPredictor, &'a LsStats, &'a [f64], ExplainerConfig), LsStatus> {
    let p = predictor
        .as_ref()
        .ok_or_else(|| fail(LsStatus::NullArgument, "predictor is null"))?;
    let s = stats.as_ref().ok_or_else(|| fail(LsStatus::NullArgument, "stats is null"))?;
    let c = config.as_ref().ok_or_else(|| fail(LsStatus::NullArgument, "config is null"))?;
    let x = slice_arg(point, s.stats.dims(), "point")?;
    Ok((p, s, x, (*c).into()))
}

/// Explains `point` (length = the stats' feature count) with one LIME run on
/// the perturbation batch drawn from `seed`.
///
/// # Safety
/// All pointers must be valid; `point` must hold `ls_stats_dims(stats)`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_explain(
    predictor: *const LsPredictor,
    stats: *const LsStats,
    point: *const f64,
    config: *const LsConfig,
    seed: u64,
    out: *mut *mut LsExplanation,
) -> LsStatus {
    guard(|| {
        if out.is_null() {
            return fail(LsStatus::NullArgument, "out is null");
        }
        let (p, s, x, cfg) = try_ls!(explainer_inputs(predictor, stats, point, config));
        let result = Explainer::new(p.inner.as_ref(), s.stats.clone(), s.names.clone(), cfg)
            .and_then(|e| e.explain_once(x, seed));
        match result {
            Ok(inner) => into_handle(LsExplanation { inner }, out),
            Err(e) => fail_with(e),
        }
    })
}

/// # Safety
/// `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_explanation_intercept(e: *const LsExplanation) -> f64 {
    e.as_ref().map_or(f64::NAN, |e| e.inner.local_model.intercept)
}

/// Surrogate prediction at the query point.
///
/// # Safety
/// `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_explanation_lime_prediction(e: *const LsExplanation) -> f64 {
    e.as_ref().map_or(f64::NAN, |e| e.inner.lime_prediction)
}

/// # Safety
/// `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_explanation_len(e: *const LsExplanation) -> usize {
    e.as_ref().map_or(0, |e| e.inner.feature_contributions.len())
}

/// Contribution `k`, in decreasing order of magnitude.
///
/// # Safety
/// `e` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_explanation_get(e: *const LsExplanation, k: usize, out: *mut LsContribution) -> LsStatus {
    guard(|| {
        let e = non_null!(e.as_ref(), "explanation");
        let out = non_null!(out.as_mut(), "out");
        let Some(c) = e.inner.feature_contributions.get(k) else {
            return fail(LsStatus::OutOfRange, format!("contribution {k} out of range"));
        };
        *out = LsContribution {
            feature_index: c.index,
            coefficient: c.coefficient,
            raw_coefficient: c.raw_coefficient,
            variance: c.variance,
            ci_lower: c.interval.lower,
            ci_upper: c.interval.upper,
            contribution: c.contribution,
        };
        LsStatus::Ok
    })
}

/// The explanation as JSON; free with [`ls_string_free`]. Null on failure.
///
/// # Safety
/// `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_explanation_to_json(e: *const LsExplanation) -> *mut c_char {
    match e.as_ref() {
        Some(e) => json_string(&e.inner),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `e` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_explanation_free(e: *mut LsExplanation) {
    free_handle(e)
}

// ---------------------------------------------------------------- report

pub struct LsReport {
    inner: StabilityReport,
}

unsafe fn stability_impl(
    predictor: *const LsPredictor,
    stats: *const LsStats,
    point: *const f64,
    config: *const LsConfig,
    mode: SeedMode,
    out: *mut *mut LsReport,
) -> LsStatus {
    if out.is_null() {
        return fail(LsStatus::NullArgument, "out is null");
    }
    let (p, s, x, cfg) = try_ls!(explainer_inputs(predictor, stats, point, config));
    let result = Explainer::new(p.inner.as_ref(), s.stats.clone(), s.names.clone(), cfg)
        .and_then(|e| e.stability_run_with(x, mode));
    match result {
        Ok(inner) => into_handle(LsReport { inner }, out),
        Err(e) => fail_with(e),
    }
}

/// Runs `config.repeats` explanations with seeds derived from
/// `config.master_seed` and scores their stability.
///
/// # Safety
/// As for [`ls_explain`].
#[no_mangle]
pub unsafe extern "C" fn ls_stability(
    predictor: *const LsPredictor,
    stats: *const LsStats,
    point: *const f64,
    config: *const LsConfig,
    out: *mut *mut LsReport,
) -> LsStatus {
    guard(|| stability_impl(predictor, stats, point, config, SeedMode::Derived, out))
}

/// Like [`ls_stability`] but every repeat uses `seed`, so all repeats are
/// identical. Useful only as a diagnostic.
///
/// # Safety
/// As for [`ls_explain`].
#[no_mangle]
pub unsafe extern "C" fn ls_stability_fixed_seed(
    predictor: *const LsPredictor,
    stats: *const LsStats,
    point: *const f64,
    config: *const LsConfig,
    seed: u64,
    out: *mut *mut LsReport,
) -> LsStatus {
    guard(|| stability_impl(predictor, stats, point, config, SeedMode::Fixed(seed), out))
}

/// Variables Stability Index, percent.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_report_vsi(r: *const LsReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.inner.vsi)
}

/// Coefficients Stability Index, percent.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_report_csi(r: *const LsReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.inner.csi)
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_report_num_models(r: *const LsReport) -> usize {
    r.as_ref().map_or(0, |r| r.inner.models.len())
}

/// Partial index of `feature`. Fails with [`LsStatus::OutOfRange`] when the
/// feature was not scored.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_report_partial_index(r: *const LsReport, feature: usize, out: *mut f64) -> LsStatus {
    guard(|| {
        let r = non_null!(r.as_ref(), "report");
        let out = non_null!(out.as_mut(), "out");
        match r.inner.par.get(&feature) {
            Some(&v) => {
                *out = v;
                LsStatus::Ok
            }
            None => fail(LsStatus::OutOfRange, format!("feature {feature} was not scored")),
        }
    })
}

/// The report as JSON; free with [`ls_string_free`]. Null on failure.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_report_to_json(r: *const LsReport) -> *mut c_char {
    match r.as_ref() {
        Some(r) => json_string(&r.inner),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_report_free(r: *mut LsReport) {
    free_handle(r)
}
