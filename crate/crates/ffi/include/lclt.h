#ifndef LCLT_H
#define LCLT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Evaluator selector.
 */
typedef enum LcltMethod {
  LCLT_METHOD_SERIES = 0,
  LCLT_METHOD_CONTOUR = 1,
  LCLT_METHOD_ABS_SQUARED_AFE = 2,
  LCLT_METHOD_L_VALUE_AFE = 3,
} LcltMethod;

/**
 * Sampling mode.
 */
typedef enum LcltMode {
  LCLT_MODE_RANDOM_UNIFORM = 0,
  LCLT_MODE_EQUISPACED = 1,
} LcltMode;

/**
 * Status codes, equal to the command-line exit codes.
 */
typedef enum LcltStatus {
  LCLT_STATUS_OK = 0,
  LCLT_STATUS_DATA_INTEGRITY = 2,
  LCLT_STATUS_CAPACITY = 3,
  LCLT_STATUS_EVALUATOR = 4,
  LCLT_STATUS_USAGE = 64,
  /**
   * A Rust panic was caught at the boundary.
   */
  LCLT_STATUS_INTERNAL = 70,
} LcltStatus;

/**
 * Opaque eigenform handle.
 */
typedef struct LcltForm LcltForm;

/**
 * Opaque sample-run handle.
 */
typedef struct LcltSampleRun LcltSampleRun;

/**
 * Mirror of the evaluator settings.
 */
typedef struct LcltEvalConfig {
  double contour_c;
  double kernel_scale;
  double quad_step;
  double series_tol;
  uint64_t length_cap;
  double vgrid_step;
  double afe_c;
  double afe_step;
} LcltEvalConfig;

/**
 * `|L(σ + it)|²` and its error estimate.
 */
typedef struct LcltPoint {
  double sigma;
  double t;
  double abs_l_sq;
  double log_abs_l;
  double est_error;
  uint64_t terms;
  bool near_zero;
} LcltPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *lclt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lclt_version(void);

/**
 * Default evaluator settings.
 */
struct LcltEvalConfig lclt_eval_config_default(void);

/**
 * Build the eigenform of `weight` with eigenvalues up to `nmax`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LcltStatus lclt_form_new(uint32_t weight, uint64_t nmax, struct LcltForm **out);

/**
 * Load a table of `n a(n)` lines and check it.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for one handle.
 */
enum LcltStatus lclt_form_load(const char *path, uint32_t weight, struct LcltForm **out);

/**
 * Release a form. Null is ignored.
 *
 * # Safety
 * `form` is null or a handle from `lclt_form_new`/`lclt_form_load` not yet freed.
 */
void lclt_form_free(struct LcltForm *form);

/**
 * Weight of a form, or 0 for null.
 *
 * # Safety
 * `form` is null or a live handle.
 */
uint32_t lclt_form_weight(const struct LcltForm *form);

/**
 * Largest tabulated index, or 0 for null.
 *
 * # Safety
 * `form` is null or a live handle.
 */
uint64_t lclt_form_max_n(const struct LcltForm *form);

/**
 * `λ(n) = a(n) / n^{(k-1)/2}`.
 *
 * # Safety
 * `form` is a live handle and `out` valid for one `double`.
 */
enum LcltStatus lclt_form_lambda(const struct LcltForm *form, uint64_t n, double *out);

/**
 * Eigenvalue-table length that `method` needs at `sigma + i t`.
 */
uint64_t lclt_required_length(uint32_t weight,
                              double sigma,
                              double t,
                              enum LcltMethod method,
                              const struct LcltEvalConfig *cfg);

/**
 * Eigenvalue-table length a sampling run at height `big_t` needs for a
 * form of `weight`, with the parameters derived from `big_t`. Writes 0
 * and fails when `big_t` is out of range.
 *
 * # Safety
 * `cfg` null or valid, `out` valid for one value.
 */
enum LcltStatus lclt_sample_table_length(uint32_t weight,
                                         double big_t,
                                         const struct LcltEvalConfig *cfg,
                                         uint64_t *out);

/**
 * `|L(σ + it)|²` by `method`. `cfg` may be null for the defaults.
 *
 * # Safety
 * `form` is a live handle, `cfg` null or valid, `out` valid for one point.
 */
enum LcltStatus lclt_eval(const struct LcltForm *form,
                          const struct LcltEvalConfig *cfg,
                          double sigma,
                          double t,
                          enum LcltMethod method,
                          struct LcltPoint *out);

/**
 * Complex value `L(σ + it)` and its absolute error estimate.
 *
 * # Safety
 * `form` is a live handle, `cfg` null or valid, the outputs valid.
 */
enum LcltStatus lclt_l_value(const struct LcltForm *form,
                             const struct LcltEvalConfig *cfg,
                             double sigma,
                             double t,
                             double *re,
                             double *im,
                             double *est_error);

/**
 * Sample `count` ordinates in `[T, 2T]` with the default parameters for
 * `T`. Each form must cover the heights sampled.
 *
 * # Safety
 * `forms` points to `nforms` live handles; `cfg` is null or valid; `out`
 * is valid for one handle.
 */
enum LcltStatus lclt_sample_new(const struct LcltForm *const *forms,
                                uintptr_t nforms,
                                double big_t,
                                uint64_t count,
                                uint64_t seed,
                                enum LcltMode mode,
                                bool mollifier,
                                const struct LcltEvalConfig *cfg,
                                struct LcltSampleRun **out);

/**
 * Release a sample run. Null is ignored.
 *
 * # Safety
 * `run` is null or a handle from `lclt_sample_new` not yet freed.
 */
void lclt_sample_free(struct LcltSampleRun *run);

/**
 * Number of records, or 0 for null.
 *
 * # Safety
 * `run` is null or a live handle.
 */
uint64_t lclt_sample_len(const struct LcltSampleRun *run);

/**
 * Ordinate and `log |L(f_j, 1/2 + it)|` of record `i`.
 *
 * # Safety
 * `run` is a live handle; outputs valid.
 */
enum LcltStatus lclt_sample_record(const struct LcltSampleRun *run,
                                   uint64_t i,
                                   uint64_t j,
                                   double *t,
                                   double *log_abs_l);

/**
 * The run as CSV. Free the string with [`lclt_string_free`].
 *
 * # Safety
 * `run` is a live handle; `out` valid for one pointer.
 */
enum LcltStatus lclt_sample_csv(const struct LcltSampleRun *run, char **out);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a string from this library not yet freed.
 */
void lclt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LCLT_H */
