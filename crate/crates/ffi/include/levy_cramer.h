#ifndef LEVY_CRAMER_H
#define LEVY_CRAMER_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `LC_STATUS_OK` is zero; everything else is an error.
 */
typedef enum {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_UTF8 = 2,
  LC_STATUS_PARSE = 3,
  LC_STATUS_INVALID_MODEL = 4,
  LC_STATUS_DOMAIN = 5,
  LC_STATUS_PHI_INFINITE = 6,
  LC_STATUS_NO_ROOT = 7,
  LC_STATUS_UNSUPPORTED_TILT = 8,
  LC_STATUS_NO_CLOSED_FORM = 9,
  LC_STATUS_NON_TERMINATION = 10,
  LC_STATUS_DEGENERATE_INPUT = 11,
  LC_STATUS_INSUFFICIENT_TAIL = 12,
  LC_STATUS_LADDER_TIMEOUT = 13,
  LC_STATUS_FORMAT = 14,
  LC_STATUS_IO = 15,
  LC_STATUS_BUFFER_TOO_SMALL = 16,
  LC_STATUS_PANIC = 17,
} LcStatus;

/**
 * Opaque sample batch handle.
 */
typedef struct LcBatch LcBatch;

/**
 * Opaque Lévy model handle.
 */
typedef struct LcModel LcModel;

typedef struct {
  double chi;
  double phi_prime_at_chi;
  /**
   * `-phi'(chi)`, the drift of the tilted process.
   */
  double tilt_mean_m;
  double bracket_lo;
  double bracket_hi;
  uint32_t iterations;
} LcCramer;

typedef struct {
  double value;
  double se;
} LcEstimate;

typedef struct {
  double c_hat;
  double c_se;
  double m;
  double chi;
  uint64_t n;
} LcConstant;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next library call on the same thread.
 */
const char *lc_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *lc_version(void);

/**
 * Parses a model spec such as `cpp:a=0.5,b=1` into a new handle.
 *
 * # Safety
 * `spec` must be a nul-terminated string; `out` must be writable.
 */
LcStatus lc_model_parse(const char *spec, LcModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from [`lc_model_parse`] and not have been freed.
 */
void lc_model_free(LcModel *model);

/**
 * Laplace exponent `phi(lambda)`, with `E exp(lambda xi_t) = exp(-t phi(lambda))`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
LcStatus lc_model_phi(const LcModel *model, double lambda, double *out);

/**
 * Solves `phi(chi) = 0` for the positive Cramér root.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
LcStatus lc_solve_cramer(const LcModel *model, LcCramer *out);

/**
 * Samples `n` draws of `A_inf` into a new batch handle.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
LcStatus lc_sample_a_infinity(const LcModel *model,
                              uint64_t n,
                              double step,
                              double tol,
                              uint64_t seed,
                              LcBatch **out);

/**
 * Number of values in a batch; 0 for null.
 *
 * # Safety
 * `batch` must be null or a live handle.
 */
size_t lc_batch_len(const LcBatch *batch);

/**
 * Copies the batch values into `dst`, which holds `capacity` doubles.
 *
 * # Safety
 * `batch` must be a live handle; `dst` must be writable for `capacity` doubles.
 */
LcStatus lc_batch_copy(const LcBatch *batch, double *dst, size_t capacity);

/**
 * Releases a batch handle. Null is ignored.
 *
 * # Safety
 * `batch` must come from [`lc_sample_a_infinity`] and not have been freed.
 */
void lc_batch_free(LcBatch *batch);

/**
 * Hill estimate of the tail index from the top `k` of `len` values (any order).
 *
 * # Safety
 * `values` must be readable for `len` doubles; `out` must be writable.
 */
LcStatus lc_hill_estimate(const double *values, size_t len, size_t k, LcEstimate *out);

/**
 * Monte-Carlo estimate of the tail constant `C`, solving for the Cramér root first.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
LcStatus lc_estimate_constant(const LcModel *model,
                              uint64_t n,
                              double step,
                              double tol,
                              uint64_t seed,
                              LcConstant *out);

/**
 * Exact tail constant for models with a closed-form law.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
LcStatus lc_exact_tail_constant(const LcModel *model, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEVY_CRAMER_H */
