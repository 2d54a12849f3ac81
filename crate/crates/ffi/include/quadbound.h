#ifndef QUADBOUND_H
#define QUADBOUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible entry point.
 */
typedef enum QbStatus {
  QB_STATUS_OK = 0,
  QB_STATUS_NULL_POINTER = 1,
  QB_STATUS_INVALID_UTF8 = 2,
  QB_STATUS_DIMENSION_MISMATCH = 3,
  QB_STATUS_INVALID_REGION = 4,
  QB_STATUS_INVALID_PARAMETER = 5,
  QB_STATUS_OUT_OF_REGION = 6,
  QB_STATUS_BUDGET_EXHAUSTED = 7,
  QB_STATUS_INDIVISIBLE_BUDGET = 8,
  QB_STATUS_PARSE = 9,
  QB_STATUS_PACKING = 10,
  QB_STATUS_IO = 11,
  QB_STATUS_PANIC = 99,
} QbStatus;

/**
 * Estimator selector.
 */
typedef enum QbMethod {
  QB_METHOD_GQ = 0,
  QB_METHOD_SR = 1,
} QbMethod;

/**
 * Stateful noisy oracle with its own RNG stream and query log.
 */
typedef struct QbOracle QbOracle;

/**
 * Polynomial integrand.
 */
typedef struct QbPolynomial QbPolynomial;

/**
 * Axis-aligned integration region.
 */
typedef struct QbRegion QbRegion;

typedef struct QbEstimate {
  double estimate;
  double exact;
  double abs_error;
  uint64_t total_queries;
  uint64_t per_node;
  uint64_t node_count;
  /**
   * Worst-case bound for the method (`gq_upper` or `sr_upper`).
   */
  double bound;
} QbEstimate;

typedef struct QbBound {
  double value;
  /**
   * 0 when a precondition of the formula is violated.
   */
  int32_t valid;
} QbBound;

typedef struct QbRecoverySummary {
  uint64_t trials;
  uint64_t failures;
  double failure_rate;
  double fano_bound;
  double mean_abs_error;
  double psi_third;
  uint64_t packing_size;
  int32_t packing_complete;
} QbRecoverySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qb_version(void);

/**
 * Parses the line format `coeff k1 ... kd`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum QbStatus qb_polynomial_parse(const char *text, struct QbPolynomial **out);

/**
 * Random polynomial of degree at most 3 in every variable.
 *
 * # Safety
 * `out` must be writable.
 */
enum QbStatus qb_polynomial_random_cubic(size_t d, uint64_t seed, struct QbPolynomial **out);

/**
 * # Safety
 * `p` must be null or a handle returned by this library, not yet freed.
 */
void qb_polynomial_free(struct QbPolynomial *p);

/**
 * # Safety
 * `p` must be a live handle.
 */
size_t qb_polynomial_dim(const struct QbPolynomial *p);

/**
 * # Safety
 * `p` must be a live handle; `x` must point to `len` doubles; `out` must be writable.
 */
enum QbStatus qb_polynomial_evaluate(const struct QbPolynomial *p,
                                     const double *x,
                                     size_t len,
                                     double *out);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum QbStatus qb_polynomial_exact_integral(const struct QbPolynomial *p,
                                           const struct QbRegion *region,
                                           double *out);

/**
 * Upper bound on the fourth partial derivatives over `region`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum QbStatus qb_polynomial_fourth_derivative_bound(const struct QbPolynomial *p,
                                                    const struct QbRegion *region,
                                                    double *out);

/**
 * `[-r, r]^d`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QbStatus qb_region_cube(size_t d, double r, struct QbRegion **out);

/**
 * Rectangle from `d` lower and `d` upper limits.
 *
 * # Safety
 * `lower` and `upper` must each point to `d` doubles; `out` must be writable.
 */
enum QbStatus qb_region_new(const double *lower,
                            const double *upper,
                            size_t d,
                            struct QbRegion **out);

/**
 * # Safety
 * `region` must be null or a live handle.
 */
void qb_region_free(struct QbRegion *region);

/**
 * Noise-free oracle when `sigma == 0`, Gaussian noise otherwise. A `budget`
 * of 0 means unlimited.
 *
 * # Safety
 * `out` must be writable.
 */
enum QbStatus qb_oracle_new(double sigma, uint64_t seed, uint64_t budget, struct QbOracle **out);

/**
 * # Safety
 * `oracle` must be null or a live handle.
 */
void qb_oracle_free(struct QbOracle *oracle);

/**
 * Number of queries answered so far.
 *
 * # Safety
 * `oracle` must be a live handle.
 */
uint64_t qb_oracle_query_count(const struct QbOracle *oracle);

/**
 * # Safety
 * Handles must be live; `x` must point to `len` doubles; `out` must be writable.
 */
enum QbStatus qb_oracle_query(struct QbOracle *oracle,
                              const struct QbPolynomial *p,
                              const double *x,
                              size_t len,
                              double *out);

/**
 * Runs the chosen rule with `m` queries per node. Gauss quadrature requires
 * a cube centred at the origin.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum QbStatus qb_estimate(enum QbMethod method,
                          const struct QbRegion *region,
                          struct QbOracle *oracle,
                          const struct QbPolynomial *p,
                          uint64_t m,
                          struct QbEstimate *out);

struct QbBound qb_bound_lower(size_t d, double r, double t);

struct QbBound qb_bound_gq_upper(size_t d, double r, double sigma, double t, double k);

/**
 * Pass a negative `c` to use the default Hermite constant `8 r^5 / 45`.
 */
struct QbBound qb_bound_gq_gaussian(size_t d, double r, double sigma, double t, double k, double c);

struct QbBound qb_bound_sr_upper(size_t d, double b, double sigma, double t, double k);

struct QbBound qb_bound_kl(double t, double delta);

struct QbBound qb_bound_fano(size_t d, double t, double delta);

double qb_packing_cardinality_bound(size_t d);

/**
 * `workers == 0` uses the default thread count.
 *
 * # Safety
 * `out` must be writable.
 */
enum QbStatus qb_recovery_experiment(size_t d,
                                     double delta,
                                     double r,
                                     double sigma,
                                     uint64_t t,
                                     size_t trials,
                                     uint64_t seed,
                                     size_t workers,
                                     struct QbRecoverySummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUADBOUND_H */
