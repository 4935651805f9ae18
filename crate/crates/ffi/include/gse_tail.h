#ifndef GSE_TAIL_H
#define GSE_TAIL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GseFamily {
  GSE_FAMILY_NORMAL = 0,
  GSE_FAMILY_STUDENT_T = 1,
  GSE_FAMILY_LOGISTIC = 2,
  GSE_FAMILY_LAPLACE = 3,
} GseFamily;

typedef enum GseRoot {
  GSE_ROOT_SYMMETRIC = 0,
  GSE_ROOT_CHOLESKY = 1,
} GseRoot;

typedef enum GseSkew {
  GSE_SKEW_HALF = 0,
  GSE_SKEW_NORMAL_CDF = 1,
  GSE_SKEW_STUDENT_T_CDF = 2,
  GSE_SKEW_LOGISTIC_CDF = 3,
  GSE_SKEW_LAPLACE_CDF = 4,
} GseSkew;

typedef enum GseStatus {
  GSE_STATUS_OK = 0,
  GSE_STATUS_NULL_POINTER = 1,
  GSE_STATUS_DOMAIN = 2,
  GSE_STATUS_PARAMETER = 3,
  GSE_STATUS_DIMENSION = 4,
  GSE_STATUS_NOT_POSITIVE_DEFINITE = 5,
  GSE_STATUS_NUMERIC = 6,
  GSE_STATUS_DEGENERATE_TAIL = 7,
  GSE_STATUS_PANIC = 8,
} GseStatus;

/**
 * Opaque distribution handle.
 */
typedef struct GseHandle GseHandle;

/**
 * Distribution parameters. `sigma` is row-major `n*n`; `gamma` may be
 * null for half skewing. `dof` is read for the Student-t family and
 * `skew_dof` for Student-t cdf skewing.
 */
typedef struct GseSpec {
  size_t n;
  enum GseFamily family;
  double dof;
  enum GseSkew skew;
  double skew_dof;
  enum GseRoot root;
  const double *mu;
  const double *sigma;
  const double *gamma;
} GseSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a distribution. On success `*out` owns a handle that must be
 * released with `gse_distribution_free`.
 *
 * # Safety
 * `spec` must point to a valid `GseSpec` whose arrays hold the documented
 * number of elements; `out` must be writable.
 */
enum GseStatus gse_distribution_new(const struct GseSpec *spec, struct GseHandle **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `h` must come from `gse_distribution_new` and not have been freed.
 */
void gse_distribution_free(struct GseHandle *h);

/**
 * Dimension of the distribution, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t gse_distribution_dim(const struct GseHandle *h);

/**
 * Density at `y` (`n` doubles).
 *
 * # Safety
 * `h` must be a live handle, `y` must hold `n` doubles, `out` writable.
 */
enum GseStatus gse_pdf(const struct GseHandle *h, const double *y, double *out);

/**
 * VaR at level `q` of margin `k` (zero-based), by the default method.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum GseStatus gse_marginal_var(const struct GseHandle *h, size_t k, double q, double *out);

/**
 * MTCE at quantile levels `q` (`n` doubles) into `out` (`n` doubles).
 *
 * # Safety
 * `h` must be a live handle; `q` and `out` must hold `n` doubles.
 */
enum GseStatus gse_mtce(const struct GseHandle *h, const double *q, double *out);

/**
 * MTCov at quantile levels `q` into `out` (`n*n`, row-major).
 *
 * # Safety
 * `h` must be a live handle; `q` must hold `n` doubles and `out` `n*n`.
 */
enum GseStatus gse_mtcov(const struct GseHandle *h, const double *q, double *out);

/**
 * MTCorr at quantile levels `q` into `out` (`n*n`, row-major).
 *
 * # Safety
 * As for `gse_mtcov`.
 */
enum GseStatus gse_mtcorr(const struct GseHandle *h, const double *q, double *out);

/**
 * Tail variance of a univariate distribution at level `q`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum GseStatus gse_tv(const struct GseHandle *h, double q, double *out);

/**
 * Message of the last failure on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *gse_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *gse_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSE_TAIL_H */
