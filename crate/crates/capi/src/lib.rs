//! C ABI over the survival crate: opaque handles, status codes, and a
//! generated `survival.h` (see `include/` after building).
//!
//! Conventions:
//! - Every fallible call returns a [`survival_status`]; outputs arrive
//!   through out-pointers and are only valid when the call returns
//!   `SURVIVAL_OK` (non-convergence additionally yields a diagnostic model,
//!   see `survival_fit_cox`).
//! - Handles are freed with their matching `_free` function; strings
//!   returned by `_to_json` with [`survival_string_free`].
//! - [`survival_last_error_message`] returns a thread-local message for the
//!   most recent failure on the calling thread.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use survival::cli::artifact;
use survival::coxph::FittedCoxModel;
use survival::dataset::{load_survival_csv, Cohort, CovariateVector, SurvivalSchema};
use survival::glm::{FittedGlmModel, GlmFamily};
use survival::predict::{survival_at, time_to_threshold, SurvivalModel};
use survival::{Error, FitConfig};

/// Status code for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum survival_status {
    SURVIVAL_OK = 0,
    /// Null pointer, bad UTF-8, or an argument outside its domain.
    SURVIVAL_ERR_INVALID_ARGUMENT = 1,
    SURVIVAL_ERR_SCHEMA = 2,
    SURVIVAL_ERR_PARSE = 3,
    SURVIVAL_ERR_VALIDATION = 4,
    SURVIVAL_ERR_DOMAIN = 5,
    SURVIVAL_ERR_DEGENERATE_DATA = 6,
    SURVIVAL_ERR_SPEC = 7,
    /// The fit stopped without converging; a diagnostic model with
    /// `converged = false` is still returned and must be freed.
    SURVIVAL_ERR_NON_CONVERGENCE = 8,
    SURVIVAL_ERR_IO = 9,
    SURVIVAL_ERR_INTERNAL = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error_message(message: String) {
    let message = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained a nul byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(error: &Error) -> survival_status {
    match error {
        Error::Schema(_) => survival_status::SURVIVAL_ERR_SCHEMA,
        Error::Parse { .. } => survival_status::SURVIVAL_ERR_PARSE,
        Error::Validation { .. } => survival_status::SURVIVAL_ERR_VALIDATION,
        Error::Domain(_) => survival_status::SURVIVAL_ERR_DOMAIN,
        Error::DegenerateData(_) => survival_status::SURVIVAL_ERR_DEGENERATE_DATA,
        Error::Spec(_) => survival_status::SURVIVAL_ERR_SPEC,
        Error::NonConvergedGlm(_) | Error::NonConvergedCox(_) => {
            survival_status::SURVIVAL_ERR_NON_CONVERGENCE
        }
        Error::Io(_) => survival_status::SURVIVAL_ERR_IO,
        Error::Csv(_) => survival_status::SURVIVAL_ERR_PARSE,
        Error::Json(_) => survival_status::SURVIVAL_ERR_SCHEMA,
    }
}

fn fail(error: &Error) -> survival_status {
    set_error_message(error.to_string());
    status_of(error)
}

fn invalid(message: &str) -> survival_status {
    set_error_message(message.to_string());
    survival_status::SURVIVAL_ERR_INVALID_ARGUMENT
}

/// Guard against unwinding across the FFI boundary.
fn guarded(body: impl FnOnce() -> survival_status) -> survival_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".to_string());
            set_error_message(message);
            survival_status::SURVIVAL_ERR_INTERNAL
        }
    }
}

unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, survival_status> {
    if ptr.is_null() {
        return Err(invalid(&format!("{what} must not be null")));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn optional_str<'a>(
    ptr: *const c_char,
    what: &str,
) -> Result<Option<&'a str>, survival_status> {
    if ptr.is_null() {
        Ok(None)
    } else {
        required_str(ptr, what).map(Some)
    }
}

/// Opaque cohort handle.
pub struct survival_cohort {
    inner: Cohort,
}

/// Opaque Cox model handle.
pub struct survival_cox_model {
    inner: FittedCoxModel,
}

/// Opaque GLM handle (Poisson-survival family).
pub struct survival_glm_model {
    inner: FittedGlmModel,
}

/// Message for the most recent failure on this thread, or null. The pointer
/// is valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn survival_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map(|s| s.as_ptr()).unwrap_or(std::ptr::null()))
}

/// Load a survival cohort from a CSV file.
///
/// `covariate_cols` is a comma-separated list of column names; `id_col` may
/// be null (row numbers become ids). On success `*out_cohort` owns the
/// cohort and must be freed with `survival_cohort_free`.
///
/// # Safety
/// String arguments must be null or valid nul-terminated strings;
/// `out_cohort` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn survival_cohort_load_csv(
    path: *const c_char,
    time_col: *const c_char,
    event_col: *const c_char,
    id_col: *const c_char,
    covariate_cols: *const c_char,
    out_cohort: *mut *mut survival_cohort,
) -> survival_status {
    guarded(|| {
        if out_cohort.is_null() {
            return invalid("out_cohort must not be null");
        }
        let path = match required_str(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        let time = match required_str(time_col, "time_col") {
            Ok(s) => s.to_string(),
            Err(status) => return status,
        };
        let event = match required_str(event_col, "event_col") {
            Ok(s) => s.to_string(),
            Err(status) => return status,
        };
        let id = match optional_str(id_col, "id_col") {
            Ok(s) => s.map(str::to_string),
            Err(status) => return status,
        };
        let covariates = match required_str(covariate_cols, "covariate_cols") {
            Ok(s) => s
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
            Err(status) => return status,
        };
        let schema = SurvivalSchema { id, time, event, covariates };
        match load_survival_csv(&path, &schema) {
            Ok(cohort) => {
                *out_cohort = Box::into_raw(Box::new(survival_cohort { inner: cohort }));
                survival_status::SURVIVAL_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of subjects.
///
/// # Safety
/// `cohort` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn survival_cohort_len(cohort: *const survival_cohort) -> usize {
    if cohort.is_null() {
        return 0;
    }
    (*cohort).inner.len()
}

/// Number of subjects with an observed event.
///
/// # Safety
/// `cohort` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn survival_cohort_n_events(cohort: *const survival_cohort) -> usize {
    if cohort.is_null() {
        return 0;
    }
    (*cohort).inner.n_events()
}

/// # Safety
/// `cohort` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn survival_cohort_free(cohort: *mut survival_cohort) {
    if !cohort.is_null() {
        drop(Box::from_raw(cohort));
    }
}

fn fit_config(tol: f64, max_iter: u32) -> FitConfig {
    let defaults = FitConfig::default();
    FitConfig {
        tol: if tol > 0.0 { tol } else { defaults.tol },
        max_iter: if max_iter > 0 { max_iter as usize } else { defaults.max_iter },
        ties: defaults.ties,
    }
}

/// Fit a Cox proportional hazards model (Breslow ties).
///
/// Pass `tol <= 0` or `max_iter == 0` to use the defaults (1e-8, 100). On
/// `SURVIVAL_ERR_NON_CONVERGENCE` the handle still receives the last
/// iterate with `converged = false` for diagnostics.
///
/// # Safety
/// `cohort` must be a live handle; `out_model` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn survival_fit_cox(
    cohort: *const survival_cohort,
    tol: f64,
    max_iter: u32,
    out_model: *mut *mut survival_cox_model,
) -> survival_status {
    guarded(|| {
        if cohort.is_null() || out_model.is_null() {
            return invalid("cohort and out_model must not be null");
        }
        *out_model = std::ptr::null_mut();
        match survival::coxph::fit_cox(&(*cohort).inner, &fit_config(tol, max_iter)) {
            Ok(model) => {
                *out_model = Box::into_raw(Box::new(survival_cox_model { inner: model }));
                survival_status::SURVIVAL_OK
            }
            Err(Error::NonConvergedCox(model)) => {
                let status = fail(&Error::NonConvergedCox(model.clone()));
                *out_model = Box::into_raw(Box::new(survival_cox_model { inner: *model }));
                status
            }
            Err(e) => fail(&e),
        }
    })
}

/// Fit the Poisson-regression survival model S(t|x) = exp(-t exp(b0 + b'x)).
///
/// Same conventions as `survival_fit_cox`.
///
/// # Safety
/// `cohort` must be a live handle; `out_model` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn survival_fit_poisson(
    cohort: *const survival_cohort,
    tol: f64,
    max_iter: u32,
    out_model: *mut *mut survival_glm_model,
) -> survival_status {
    guarded(|| {
        if cohort.is_null() || out_model.is_null() {
            return invalid("cohort and out_model must not be null");
        }
        *out_model = std::ptr::null_mut();
        match survival::glm::fit_poisson_survival(&(*cohort).inner, &fit_config(tol, max_iter)) {
            Ok(model) => {
                *out_model = Box::into_raw(Box::new(survival_glm_model { inner: model }));
                survival_status::SURVIVAL_OK
            }
            Err(Error::NonConvergedGlm(model)) => {
                let status = fail(&Error::NonConvergedGlm(model.clone()));
                *out_model = Box::into_raw(Box::new(survival_glm_model { inner: *model }));
                status
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `model` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_model_free(model: *mut survival_cox_model) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn survival_glm_model_free(model: *mut survival_glm_model) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of covariates the model was trained on.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_model_n_covariates(
    model: *const survival_cox_model,
) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).inner.coefficients.len()
}

/// Whether the fit met its convergence criterion.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_model_converged(model: *const survival_cox_model) -> bool {
    if model.is_null() {
        return false;
    }
    (*model).inner.converged
}

unsafe fn profile_from_raw(
    names: &[String],
    covariates: *const f64,
    n_covariates: usize,
) -> Result<CovariateVector, survival_status> {
    if n_covariates != names.len() {
        return Err(invalid(&format!(
            "model takes {} covariates, got {n_covariates}",
            names.len()
        )));
    }
    if n_covariates > 0 && covariates.is_null() {
        return Err(invalid("covariates must not be null"));
    }
    let values = if n_covariates == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(covariates, n_covariates).to_vec()
    };
    CovariateVector::new(names.to_vec(), values).map_err(|e| fail(&e))
}

unsafe fn survival_at_impl(
    model: SurvivalModel<'_>,
    covariates: *const f64,
    n_covariates: usize,
    times: *const f64,
    n_times: usize,
    out_survival: *mut f64,
) -> survival_status {
    if n_times > 0 && (times.is_null() || out_survival.is_null()) {
        return invalid("times and out_survival must not be null");
    }
    let profile = match profile_from_raw(model.covariate_names(), covariates, n_covariates) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let times = std::slice::from_raw_parts(times, n_times);
    match survival_at(model, &profile, times) {
        Ok(values) => {
            std::ptr::copy_nonoverlapping(values.as_ptr(), out_survival, n_times);
            survival_status::SURVIVAL_OK
        }
        Err(e) => fail(&e),
    }
}

/// S(t | x) for a Cox model at each of `n_times` times; `covariates` holds
/// the profile in the model's covariate order.
///
/// # Safety
/// `model` must be a live handle; array arguments must point to buffers of
/// the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_survival_at(
    model: *const survival_cox_model,
    covariates: *const f64,
    n_covariates: usize,
    times: *const f64,
    n_times: usize,
    out_survival: *mut f64,
) -> survival_status {
    guarded(|| {
        if model.is_null() {
            return invalid("model must not be null");
        }
        survival_at_impl(
            SurvivalModel::Cox(&(*model).inner),
            covariates,
            n_covariates,
            times,
            n_times,
            out_survival,
        )
    })
}

/// S(t | x) for a Poisson-survival model.
///
/// # Safety
/// Same contract as `survival_cox_survival_at`.
#[no_mangle]
pub unsafe extern "C" fn survival_glm_survival_at(
    model: *const survival_glm_model,
    covariates: *const f64,
    n_covariates: usize,
    times: *const f64,
    n_times: usize,
    out_survival: *mut f64,
) -> survival_status {
    guarded(|| {
        if model.is_null() {
            return invalid("model must not be null");
        }
        let m = match SurvivalModel::poisson(&(*model).inner) {
            Ok(m) => m,
            Err(e) => return fail(&e),
        };
        survival_at_impl(m, covariates, n_covariates, times, n_times, out_survival)
    })
}

/// Invert S(t | x) at `threshold` (0.5 = median survival time) by stepping
/// through the baseline hazard table. When the table never accumulates
/// enough hazard, `*out_time` is set to NaN and `*out_beyond_horizon` to
/// true.
///
/// # Safety
/// `model` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_median_time(
    model: *const survival_cox_model,
    covariates: *const f64,
    n_covariates: usize,
    threshold: f64,
    out_time: *mut f64,
    out_beyond_horizon: *mut bool,
) -> survival_status {
    guarded(|| {
        if model.is_null() || out_time.is_null() || out_beyond_horizon.is_null() {
            return invalid("model and out-pointers must not be null");
        }
        let profile =
            match profile_from_raw(&(*model).inner.covariate_names, covariates, n_covariates) {
                Ok(p) => p,
                Err(status) => return status,
            };
        match time_to_threshold(SurvivalModel::Cox(&(*model).inner), &profile, threshold) {
            Ok(estimate) => {
                *out_time = estimate.time.unwrap_or(f64::NAN);
                *out_beyond_horizon = estimate.time.is_none();
                survival_status::SURVIVAL_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// exp(beta) per covariate, written into `out_ratios` (length must equal
/// `survival_cox_model_n_covariates`).
///
/// # Safety
/// `model` must be a live handle; `out_ratios` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_hazard_ratios(
    model: *const survival_cox_model,
    out_ratios: *mut f64,
    len: usize,
) -> survival_status {
    guarded(|| {
        if model.is_null() || out_ratios.is_null() {
            return invalid("model and out_ratios must not be null");
        }
        let ratios = survival::predict::hazard_ratios(&(*model).inner);
        if len != ratios.len() {
            return invalid(&format!("model has {} covariates, got len {len}", ratios.len()));
        }
        for (i, r) in ratios.iter().enumerate() {
            *out_ratios.add(i) = r.hazard_ratio;
        }
        survival_status::SURVIVAL_OK
    })
}

fn string_out(text: String, out: *mut *mut c_char) -> survival_status {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            survival_status::SURVIVAL_OK
        }
        Err(_) => invalid("serialized output contained a nul byte"),
    }
}

/// Serialize the model to its JSON artifact (17 significant digits per
/// float). Free the string with `survival_string_free`.
///
/// # Safety
/// `model` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_model_to_json(
    model: *const survival_cox_model,
    out_json: *mut *mut c_char,
) -> survival_status {
    guarded(|| {
        if model.is_null() || out_json.is_null() {
            return invalid("model and out_json must not be null");
        }
        match artifact::to_json(&artifact::CoxArtifact::from(&(*model).inner)) {
            Ok(json) => string_out(json, out_json),
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `model` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn survival_glm_model_to_json(
    model: *const survival_glm_model,
    out_json: *mut *mut c_char,
) -> survival_status {
    guarded(|| {
        if model.is_null() || out_json.is_null() {
            return invalid("model and out_json must not be null");
        }
        match artifact::to_json(&artifact::GlmArtifact::from(&(*model).inner)) {
            Ok(json) => string_out(json, out_json),
            Err(e) => fail(&e),
        }
    })
}

/// Parse a Cox model from its JSON artifact.
///
/// # Safety
/// `json` must be a valid nul-terminated string; `out_model` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn survival_cox_model_from_json(
    json: *const c_char,
    out_model: *mut *mut survival_cox_model,
) -> survival_status {
    guarded(|| {
        if out_model.is_null() {
            return invalid("out_model must not be null");
        }
        let text = match required_str(json, "json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let parsed: Result<artifact::CoxArtifact, _> = serde_json::from_str(text);
        let fitted: Result<FittedCoxModel, Error> = match parsed {
            Ok(a) => a.try_into(),
            Err(e) => Err(Error::Schema(format!("not a cox artifact: {e}"))),
        };
        match fitted {
            Ok(model) => {
                *out_model = Box::into_raw(Box::new(survival_cox_model { inner: model }));
                survival_status::SURVIVAL_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Parse a Poisson-survival model from its JSON artifact.
///
/// # Safety
/// `json` must be a valid nul-terminated string; `out_model` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn survival_glm_model_from_json(
    json: *const c_char,
    out_model: *mut *mut survival_glm_model,
) -> survival_status {
    guarded(|| {
        if out_model.is_null() {
            return invalid("out_model must not be null");
        }
        let text = match required_str(json, "json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let parsed: Result<artifact::GlmArtifact, _> = serde_json::from_str(text);
        let fitted: Result<FittedGlmModel, Error> = match parsed {
            Ok(a) => a.try_into(),
            Err(e) => Err(Error::Schema(format!("not a glm artifact: {e}"))),
        };
        match fitted {
            Ok(model) => {
                if model.family != GlmFamily::PoissonSurvival {
                    return fail(&Error::Domain(
                        "only poisson_survival artifacts are supported here".to_string(),
                    ));
                }
                *out_model = Box::into_raw(Box::new(survival_glm_model { inner: model }));
                survival_status::SURVIVAL_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn survival_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
