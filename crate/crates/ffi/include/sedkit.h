#ifndef SEDKIT_H
#define SEDKIT_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The numeric values of the error classes match the exit
 * codes of the command-line tool.
 */
typedef enum SedStatus {
  SED_STATUS_OK = 0,
  SED_STATUS_INVALID_ARGUMENT = 1,
  SED_STATUS_CONFIG_ERROR = 2,
  SED_STATUS_DATA_ERROR = 3,
  SED_STATUS_NUMERICAL_ERROR = 4,
  SED_STATUS_NULL_POINTER = 5,
  SED_STATUS_PANIC = 6,
} SedStatus;

/**
 * A parsed dispatch case.
 */
typedef struct SedCase SedCase;

/**
 * The dispatch cost as a function of the forecast germ.
 */
typedef struct SedEvaluator SedEvaluator;

/**
 * A polynomial chaos surrogate.
 */
typedef struct SedSurrogate SedSurrogate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sed_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * NUL-terminated) and returns the full message length excluding the NUL.
 * Returns 0 when there is no message.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t sed_last_error(char *buf, size_t len);

/**
 * Number of chaos terms of total degree `<= order` in `dim` variables.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SedStatus sed_basis_size(size_t dim, size_t order, size_t *out);

/**
 * Number of nodes of the level-`level` sparse grid in `dim` dimensions.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SedStatus sed_sparse_grid_size(size_t dim, size_t level, size_t *out);

/**
 * Reads a case file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SedStatus sed_case_load(const char *path, struct SedCase **out);

/**
 * # Safety
 * `case` must be null or a handle from [`sed_case_load`] not yet freed.
 */
void sed_case_free(struct SedCase *case_);

/**
 * Bus, line, thermal unit, renewable site and period counts; any output
 * pointer may be null.
 *
 * # Safety
 * `case` must be a live handle; non-null outputs must be valid.
 */
enum SedStatus sed_case_dimensions(const struct SedCase *case_,
                                   size_t *buses,
                                   size_t *lines,
                                   size_t *generators,
                                   size_t *renewables,
                                   size_t *periods);

/**
 * Builds the dispatch-cost model described by an experiment configuration
 * (its `[case]` and `[forecast]` sections).
 *
 * # Safety
 * `config_path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SedStatus sed_evaluator_from_config(const char *config_path, struct SedEvaluator **out);

/**
 * # Safety
 * `ev` must be null or a live evaluator handle.
 */
void sed_evaluator_free(struct SedEvaluator *ev);

/**
 * Germ dimension.
 *
 * # Safety
 * `ev` must be a live handle and `out` a valid pointer.
 */
enum SedStatus sed_evaluator_dims(const struct SedEvaluator *ev, size_t *out);

/**
 * Optimal dispatch cost for one germ of length `len`.
 *
 * # Safety
 * `ev` must be a live handle, `germ` valid for `len` reads, `cost` valid.
 */
enum SedStatus sed_evaluator_eval(const struct SedEvaluator *ev,
                                  const double *germ,
                                  size_t len,
                                  double *cost);

/**
 * Monte Carlo estimate of the expected cost from `samples` germs.
 *
 * # Safety
 * `ev` must be a live handle; `mean` and `stderr` valid pointers.
 */
enum SedStatus sed_mc_estimate(const struct SedEvaluator *ev,
                               size_t samples,
                               uint64_t seed,
                               double *mean,
                               double *stderr);

/**
 * Order-`order` chaos surrogate projected on the level-`level` sparse grid;
 * `nodes` (may be null) receives the number of model evaluations.
 *
 * # Safety
 * `ev` must be a live handle; `out` valid; `nodes` null or valid.
 */
enum SedStatus sed_pce_build(const struct SedEvaluator *ev,
                             size_t level,
                             size_t order,
                             size_t *nodes,
                             struct SedSurrogate **out);

/**
 * # Safety
 * `s` must be null or a live surrogate handle.
 */
void sed_surrogate_free(struct SedSurrogate *s);

/**
 * Mean (`c_0`) and variance of the surrogate; either output may be null.
 *
 * # Safety
 * `s` must be a live handle; non-null outputs must be valid.
 */
enum SedStatus sed_surrogate_moments(const struct SedSurrogate *s, double *mean, double *variance);

/**
 * Evaluates the surrogate at a germ of length `len`.
 *
 * # Safety
 * `s` must be a live handle, `germ` valid for `len` reads, `out` valid.
 */
enum SedStatus sed_surrogate_eval(const struct SedSurrogate *s,
                                  const double *germ,
                                  size_t len,
                                  double *out);

/**
 * Number of chaos coefficients.
 *
 * # Safety
 * `s` must be a live handle and `out` valid.
 */
enum SedStatus sed_surrogate_len(const struct SedSurrogate *s, size_t *out);

/**
 * Copies up to `len` coefficients into `buf` in basis order.
 *
 * # Safety
 * `s` must be a live handle and `buf` valid for `len` writes.
 */
enum SedStatus sed_surrogate_coefficients(const struct SedSurrogate *s, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEDKIT_H */
