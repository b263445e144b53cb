//! C ABI over the `lclt` library.
//!
//! Every fallible call returns an [`LcltStatus`] whose values equal the
//! CLI exit codes. On failure, [`lclt_last_error`] returns the message for
//! the calling thread. Objects are opaque handles released with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lclt::hecke::{build_newform, load_eigenvalues, CuspForm};
use lclt::lfunc::{l_value_afe, log_abs_l_with, required_length, EvalConfig, Method};
use lclt::mollifier::{Params, PolyBudget};
use lclt::stats::{sample, sample_table_length, Mode, SampleOptions, SampleRun};
use lclt::LabError;
use num_complex::Complex64;

/// Status codes, equal to the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcltStatus {
    Ok = 0,
    DataIntegrity = 2,
    Capacity = 3,
    Evaluator = 4,
    Usage = 64,
    /// A Rust panic was caught at the boundary.
    Internal = 70,
}

impl From<&LabError> for LcltStatus {
    fn from(e: &LabError) -> Self {
        match e.exit_code() {
            2 => LcltStatus::DataIntegrity,
            3 => LcltStatus::Capacity,
            4 => LcltStatus::Evaluator,
            _ => LcltStatus::Usage,
        }
    }
}

/// Evaluator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcltMethod {
    Series = 0,
    Contour = 1,
    AbsSquaredAfe = 2,
    LValueAfe = 3,
}

impl From<LcltMethod> for Method {
    fn from(m: LcltMethod) -> Self {
        match m {
            LcltMethod::Series => Method::Series,
            LcltMethod::Contour => Method::Contour,
            LcltMethod::AbsSquaredAfe => Method::AbsSquaredAfe,
            LcltMethod::LValueAfe => Method::LValueAfe,
        }
    }
}

/// Sampling mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcltMode {
    RandomUniform = 0,
    Equispaced = 1,
}

/// Mirror of the evaluator settings.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LcltEvalConfig {
    pub contour_c: f64,
    pub kernel_scale: f64,
    pub quad_step: f64,
    pub series_tol: f64,
    pub length_cap: u64,
    pub vgrid_step: f64,
    pub afe_c: f64,
    pub afe_step: f64,
}

impl From<EvalConfig> for LcltEvalConfig {
    fn from(c: EvalConfig) -> Self {
        LcltEvalConfig {
            contour_c: c.contour_c,
            kernel_scale: c.kernel_scale,
            quad_step: c.quad_step,
            series_tol: c.series_tol,
            length_cap: c.length_cap as u64,
            vgrid_step: c.vgrid_step,
            afe_c: c.afe_c,
            afe_step: c.afe_step,
        }
    }
}

impl From<&LcltEvalConfig> for EvalConfig {
    fn from(c: &LcltEvalConfig) -> Self {
        EvalConfig {
            contour_c: c.contour_c,
            kernel_scale: c.kernel_scale,
            quad_step: c.quad_step,
            series_tol: c.series_tol,
            length_cap: c.length_cap as usize,
            vgrid_step: c.vgrid_step,
            afe_c: c.afe_c,
            afe_step: c.afe_step,
        }
    }
}

/// `|L(σ + it)|²` and its error estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LcltPoint {
    pub sigma: f64,
    pub t: f64,
    pub abs_l_sq: f64,
    pub log_abs_l: f64,
    pub est_error: f64,
    pub terms: u64,
    pub near_zero: bool,
}

/// Opaque eigenform handle.
pub struct LcltForm(CuspForm);

/// Opaque sample-run handle.
pub struct LcltSampleRun(SampleRun);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Run `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), LabError>) -> LcltStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            LcltStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            LcltStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic");
            LcltStatus::Internal
        }
    }
}

fn null(what: &str) -> LabError {
    LabError::Usage(format!("{what} is null"))
}

/// # Safety
/// `p` is null or points to a live value created by this library.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, LabError> {
    p.as_ref().ok_or_else(|| null(what))
}

fn config(cfg: *const LcltEvalConfig) -> EvalConfig {
    // SAFETY: callers pass null or a valid pointer, per the header contract.
    match unsafe { cfg.as_ref() } {
        Some(c) => EvalConfig::from(c),
        None => EvalConfig::default(),
    }
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lclt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lclt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default evaluator settings.
#[no_mangle]
pub extern "C" fn lclt_eval_config_default() -> LcltEvalConfig {
    EvalConfig::default().into()
}

/// Build the eigenform of `weight` with eigenvalues up to `nmax`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn lclt_form_new(weight: u32, nmax: u64, out: *mut *mut LcltForm) -> LcltStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let f = build_newform(weight, nmax as usize)?;
        *out = Box::into_raw(Box::new(LcltForm(f)));
        Ok(())
    })
}

/// Load a table of `n a(n)` lines and check it.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn lclt_form_load(path: *const c_char, weight: u32, out: *mut *mut LcltForm) -> LcltStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if path.is_null() {
            return Err(null("path"));
        }
        let p = CStr::from_ptr(path).to_str().map_err(|_| LabError::Usage("path is not UTF-8".into()))?;
        let f = load_eigenvalues(Path::new(p), weight)?;
        *out = Box::into_raw(Box::new(LcltForm(f)));
        Ok(())
    })
}

/// Release a form. Null is ignored.
///
/// # Safety
/// `form` is null or a handle from `lclt_form_new`/`lclt_form_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lclt_form_free(form: *mut LcltForm) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// Weight of a form, or 0 for null.
///
/// # Safety
/// `form` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lclt_form_weight(form: *const LcltForm) -> u32 {
    form.as_ref().map_or(0, |f| f.0.weight())
}

/// Largest tabulated index, or 0 for null.
///
/// # Safety
/// `form` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lclt_form_max_n(form: *const LcltForm) -> u64 {
    form.as_ref().map_or(0, |f| f.0.max_n() as u64)
}

/// `λ(n) = a(n) / n^{(k-1)/2}`.
///
/// # Safety
/// `form` is a live handle and `out` valid for one `double`.
#[no_mangle]
pub unsafe extern "C" fn lclt_form_lambda(form: *const LcltForm, n: u64, out: *mut f64) -> LcltStatus {
    guard(|| {
        let f = deref(form, "form")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = f.0.lambda(n)?;
        Ok(())
    })
}

/// Eigenvalue-table length that `method` needs at `sigma + i t`.
#[no_mangle]
pub extern "C" fn lclt_required_length(
    weight: u32,
    sigma: f64,
    t: f64,
    method: LcltMethod,
    cfg: *const LcltEvalConfig,
) -> u64 {
    required_length(weight, Complex64::new(sigma, t), method.into(), &config(cfg)) as u64
}

/// Eigenvalue-table length a sampling run at height `big_t` needs for a
/// form of `weight`, with the parameters derived from `big_t`. Writes 0
/// and fails when `big_t` is out of range.
///
/// # Safety
/// `cfg` null or valid, `out` valid for one value.
#[no_mangle]
pub unsafe extern "C" fn lclt_sample_table_length(weight: u32, big_t: f64, cfg: *const LcltEvalConfig, out: *mut u64) -> LcltStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = 0;
        let params = Params::new(big_t)?;
        *out = sample_table_length(weight, &params, &config(cfg)) as u64;
        Ok(())
    })
}

/// `|L(σ + it)|²` by `method`. `cfg` may be null for the defaults.
///
/// # Safety
/// `form` is a live handle, `cfg` null or valid, `out` valid for one point.
#[no_mangle]
pub unsafe extern "C" fn lclt_eval(
    form: *const LcltForm,
    cfg: *const LcltEvalConfig,
    sigma: f64,
    t: f64,
    method: LcltMethod,
    out: *mut LcltPoint,
) -> LcltStatus {
    guard(|| {
        let f = deref(form, "form")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = log_abs_l_with(&f.0, sigma, t, &config(cfg), method.into())?;
        *out = LcltPoint {
            sigma: p.sigma,
            t: p.t,
            abs_l_sq: p.abs_l_sq,
            log_abs_l: p.log_abs_l(),
            est_error: p.est_error,
            terms: p.terms as u64,
            near_zero: p.near_zero,
        };
        Ok(())
    })
}

/// Complex value `L(σ + it)` and its absolute error estimate.
///
/// # Safety
/// `form` is a live handle, `cfg` null or valid, the outputs valid.
#[no_mangle]
pub unsafe extern "C" fn lclt_l_value(
    form: *const LcltForm,
    cfg: *const LcltEvalConfig,
    sigma: f64,
    t: f64,
    re: *mut f64,
    im: *mut f64,
    est_error: *mut f64,
) -> LcltStatus {
    guard(|| {
        let f = deref(form, "form")?;
        if re.is_null() || im.is_null() || est_error.is_null() {
            return Err(null("output"));
        }
        let v = l_value_afe(&f.0, Complex64::new(sigma, t), &config(cfg))?;
        *re = v.value.re;
        *im = v.value.im;
        *est_error = v.est_error;
        Ok(())
    })
}

/// Sample `count` ordinates in `[T, 2T]` with the default parameters for
/// `T`. Each form must cover the heights sampled.
///
/// # Safety
/// `forms` points to `nforms` live handles; `cfg` is null or valid; `out`
/// is valid for one handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lclt_sample_new(
    forms: *const *const LcltForm,
    nforms: usize,
    big_t: f64,
    count: u64,
    seed: u64,
    mode: LcltMode,
    mollifier: bool,
    cfg: *const LcltEvalConfig,
    out: *mut *mut LcltSampleRun,
) -> LcltStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if forms.is_null() || nforms == 0 {
            return Err(LabError::Usage("at least one form is required".into()));
        }
        if count == 0 {
            return Err(LabError::Usage("count must be at least 1".into()));
        }
        let handles = std::slice::from_raw_parts(forms, nforms);
        let list: Vec<CuspForm> = handles.iter().map(|&h| deref(h, "form").map(|f| f.0.clone())).collect::<Result<_, _>>()?;
        let params = Params::new(big_t)?;
        let mode = match mode {
            LcltMode::RandomUniform => Mode::RandomUniform,
            LcltMode::Equispaced => Mode::Equispaced,
        };
        let opts = SampleOptions { count: count as usize, seed, mode, mollifier, budget: PolyBudget::default() };
        let run = sample(&list, &params, &config(cfg), &opts)?;
        *out = Box::into_raw(Box::new(LcltSampleRun(run)));
        Ok(())
    })
}

/// Release a sample run. Null is ignored.
///
/// # Safety
/// `run` is null or a handle from `lclt_sample_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lclt_sample_free(run: *mut LcltSampleRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of records, or 0 for null.
///
/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lclt_sample_len(run: *const LcltSampleRun) -> u64 {
    run.as_ref().map_or(0, |r| r.0.records.len() as u64)
}

/// Ordinate and `log |L(f_j, 1/2 + it)|` of record `i`.
///
/// # Safety
/// `run` is a live handle; outputs valid.
#[no_mangle]
pub unsafe extern "C" fn lclt_sample_record(
    run: *const LcltSampleRun,
    i: u64,
    j: u64,
    t: *mut f64,
    log_abs_l: *mut f64,
) -> LcltStatus {
    guard(|| {
        let r = deref(run, "run")?;
        if t.is_null() || log_abs_l.is_null() {
            return Err(null("output"));
        }
        let rec = r.0.records.get(i as usize).ok_or(LabError::OutOfRange { n: i, max: r.0.records.len() as u64 })?;
        let v = rec.log_abs_l.get(j as usize).ok_or(LabError::OutOfRange { n: j, max: rec.log_abs_l.len() as u64 })?;
        *t = rec.t;
        *log_abs_l = *v;
        Ok(())
    })
}

/// The run as CSV. Free the string with [`lclt_string_free`].
///
/// # Safety
/// `run` is a live handle; `out` valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn lclt_sample_csv(run: *const LcltSampleRun, out: *mut *mut c_char) -> LcltStatus {
    guard(|| {
        let r = deref(run, "run")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = CString::new(r.0.to_csv()).map_err(|_| LabError::DataIntegrity("CSV contains NUL".into()))?.into_raw();
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lclt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
