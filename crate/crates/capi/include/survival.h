#ifndef SURVIVAL_CAPI_H
#define SURVIVAL_CAPI_H

/* Generated by cbindgen from the survival-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code for every fallible call.
typedef enum survival_status {
  SURVIVAL_OK = 0,
  // Null pointer, bad UTF-8, or an argument outside its domain.
  SURVIVAL_ERR_INVALID_ARGUMENT = 1,
  SURVIVAL_ERR_SCHEMA = 2,
  SURVIVAL_ERR_PARSE = 3,
  SURVIVAL_ERR_VALIDATION = 4,
  SURVIVAL_ERR_DOMAIN = 5,
  SURVIVAL_ERR_DEGENERATE_DATA = 6,
  SURVIVAL_ERR_SPEC = 7,
  // The fit stopped without converging; a diagnostic model with
  // `converged = false` is still returned and must be freed.
  SURVIVAL_ERR_NON_CONVERGENCE = 8,
  SURVIVAL_ERR_IO = 9,
  SURVIVAL_ERR_INTERNAL = 10,
} survival_status;

// Opaque cohort handle.
typedef struct survival_cohort survival_cohort;

// Opaque Cox model handle.
typedef struct survival_cox_model survival_cox_model;

// Opaque GLM handle (Poisson-survival family).
typedef struct survival_glm_model survival_glm_model;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// is valid until the next failing call on the same thread.
const char *survival_last_error_message(void);

// Load a survival cohort from a CSV file.
//
// `covariate_cols` is a comma-separated list of column names; `id_col` may
// be null (row numbers become ids). On success `*out_cohort` owns the
// cohort and must be freed with `survival_cohort_free`.
//
// # Safety
// String arguments must be null or valid nul-terminated strings;
// `out_cohort` must be a valid pointer.
enum survival_status survival_cohort_load_csv(const char *path,
                                              const char *time_col,
                                              const char *event_col,
                                              const char *id_col,
                                              const char *covariate_cols,
                                              struct survival_cohort **out_cohort);

// Number of subjects.
//
// # Safety
// `cohort` must be a live handle from this library.
size_t survival_cohort_len(const struct survival_cohort *cohort);

// Number of subjects with an observed event.
//
// # Safety
// `cohort` must be a live handle from this library.
size_t survival_cohort_n_events(const struct survival_cohort *cohort);

// # Safety
// `cohort` must be null or a handle returned by this library, freed once.
void survival_cohort_free(struct survival_cohort *cohort);

// Fit a Cox proportional hazards model (Breslow ties).
//
// Pass `tol <= 0` or `max_iter == 0` to use the defaults (1e-8, 100). On
// `SURVIVAL_ERR_NON_CONVERGENCE` the handle still receives the last
// iterate with `converged = false` for diagnostics.
//
// # Safety
// `cohort` must be a live handle; `out_model` must be a valid pointer.
enum survival_status survival_fit_cox(const struct survival_cohort *cohort,
                                      double tol,
                                      uint32_t max_iter,
                                      struct survival_cox_model **out_model);

// Fit the Poisson-regression survival model S(t|x) = exp(-t exp(b0 + b'x)).
//
// Same conventions as `survival_fit_cox`.
//
// # Safety
// `cohort` must be a live handle; `out_model` must be a valid pointer.
enum survival_status survival_fit_poisson(const struct survival_cohort *cohort,
                                          double tol,
                                          uint32_t max_iter,
                                          struct survival_glm_model **out_model);

// # Safety
// `model` must be null or a handle returned by this library, freed once.
void survival_cox_model_free(struct survival_cox_model *model);

// # Safety
// `model` must be null or a handle returned by this library, freed once.
void survival_glm_model_free(struct survival_glm_model *model);

// Number of covariates the model was trained on.
//
// # Safety
// `model` must be a live handle.
size_t survival_cox_model_n_covariates(const struct survival_cox_model *model);

// Whether the fit met its convergence criterion.
//
// # Safety
// `model` must be a live handle.
bool survival_cox_model_converged(const struct survival_cox_model *model);

// S(t | x) for a Cox model at each of `n_times` times; `covariates` holds
// the profile in the model's covariate order.
//
// # Safety
// `model` must be a live handle; array arguments must point to buffers of
// the stated lengths.
enum survival_status survival_cox_survival_at(const struct survival_cox_model *model,
                                              const double *covariates,
                                              size_t n_covariates,
                                              const double *times,
                                              size_t n_times,
                                              double *out_survival);

// S(t | x) for a Poisson-survival model.
//
// # Safety
// Same contract as `survival_cox_survival_at`.
enum survival_status survival_glm_survival_at(const struct survival_glm_model *model,
                                              const double *covariates,
                                              size_t n_covariates,
                                              const double *times,
                                              size_t n_times,
                                              double *out_survival);

// Invert S(t | x) at `threshold` (0.5 = median survival time) by stepping
// through the baseline hazard table. When the table never accumulates
// enough hazard, `*out_time` is set to NaN and `*out_beyond_horizon` to
// true.
//
// # Safety
// `model` must be a live handle; out-pointers must be valid.
enum survival_status survival_cox_median_time(const struct survival_cox_model *model,
                                              const double *covariates,
                                              size_t n_covariates,
                                              double threshold,
                                              double *out_time,
                                              bool *out_beyond_horizon);

// exp(beta) per covariate, written into `out_ratios` (length must equal
// `survival_cox_model_n_covariates`).
//
// # Safety
// `model` must be a live handle; `out_ratios` must hold `len` doubles.
enum survival_status survival_cox_hazard_ratios(const struct survival_cox_model *model,
                                                double *out_ratios,
                                                size_t len);

// Serialize the model to its JSON artifact (17 significant digits per
// float). Free the string with `survival_string_free`.
//
// # Safety
// `model` must be a live handle; `out_json` must be a valid pointer.
enum survival_status survival_cox_model_to_json(const struct survival_cox_model *model,
                                                char **out_json);

// # Safety
// `model` must be a live handle; `out_json` must be a valid pointer.
enum survival_status survival_glm_model_to_json(const struct survival_glm_model *model,
                                                char **out_json);

// Parse a Cox model from its JSON artifact.
//
// # Safety
// `json` must be a valid nul-terminated string; `out_model` a valid
// pointer.
enum survival_status survival_cox_model_from_json(const char *json,
                                                  struct survival_cox_model **out_model);

// Parse a Poisson-survival model from its JSON artifact.
//
// # Safety
// `json` must be a valid nul-terminated string; `out_model` a valid
// pointer.
enum survival_status survival_glm_model_from_json(const char *json,
                                                  struct survival_glm_model **out_model);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void survival_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURVIVAL_CAPI_H */
