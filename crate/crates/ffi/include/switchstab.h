#ifndef SWITCHSTAB_H
#define SWITCHSTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_INPUT = 2,
  SS_STATUS_DIMENSION_MISMATCH = 3,
  SS_STATUS_NON_FINITE = 4,
  SS_STATUS_INDEX_OUT_OF_RANGE = 5,
  SS_STATUS_DOMAIN = 6,
  SS_STATUS_BUDGET_EXCEEDED = 7,
  SS_STATUS_UNCONVERGED = 8,
  SS_STATUS_BUFFER_TOO_SMALL = 9,
  SS_STATUS_PANIC = 10,
} SsStatus;

typedef enum SsVerdict {
  SS_VERDICT_PROVEN_UNSTABLE = 0,
  SS_VERDICT_LIKELY_STABLE = 1,
  SS_VERDICT_INCONCLUSIVE = 2,
} SsVerdict;

typedef enum SsCriterionVerdict {
  SS_CRITERION_VERDICT_STABLE = 0,
  SS_CRITERION_VERDICT_NOT_STABLE = 1,
} SsCriterionVerdict;

/**
 * Matching case of the 2×2 mixing criterion; `None` when not stable.
 */
typedef enum SsR2Case {
  SS_R2_CASE_NONE = 0,
  SS_R2_CASE_A = 1,
  SS_R2_CASE_B = 2,
  SS_R2_CASE_C = 3,
  SS_R2_CASE_D = 4,
  SS_R2_CASE_E = 5,
} SsR2Case;

/**
 * Opaque matrix class.
 */
typedef struct SsClass SsClass;

/**
 * Opaque truncated extremal norm.
 */
typedef struct SsNorm SsNorm;

/**
 * Summary of a bounds computation.
 */
typedef struct SsBounds {
  uintptr_t depth;
  double best_upper;
  double best_lower;
  uint64_t products;
  enum SsVerdict verdict;
} SsBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ss_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ss_version(void);

/**
 * Builds a class of `m` matrices of dimension `n` from `m·n·n` row-major
 * entries, member after member.
 *
 * # Safety
 * `coords` must point to `len` readable doubles and `out` must be writable.
 */
enum SsStatus ss_class_new(uintptr_t m,
                           uintptr_t n,
                           const double *coords,
                           uintptr_t len,
                           struct SsClass **out_class);

/**
 * The two-member class `{G(t), H(t)}`.
 *
 * # Safety
 * `out_class` must be writable.
 */
enum SsStatus ss_class_family(double t, struct SsClass **out_class);

/**
 * # Safety
 * `class` must come from a constructor in this library and not be used again.
 */
void ss_class_free(struct SsClass *class_);

/**
 * Number of members and their dimension.
 *
 * # Safety
 * `class` must be a live handle; the out pointers must be writable.
 */
enum SsStatus ss_class_shape(const struct SsClass *class_, uintptr_t *out_m, uintptr_t *out_n);

/**
 * Exhaustive joint spectral bounds up to `depth`.
 *
 * When `per_depth_len ≥ depth`, the per-depth upper and lower values are
 * copied into `upper_per_depth` and `lower_per_depth` (either may be NULL).
 * A nonzero `per_depth_len` smaller than `depth` is rejected.
 *
 * # Safety
 * `class` must be a live handle, `out_bounds` writable and each non-NULL
 * buffer writable for `per_depth_len` doubles.
 */
enum SsStatus ss_stability_bounds(const struct SsClass *class_,
                                  uintptr_t depth,
                                  double tolerance,
                                  uint64_t budget,
                                  struct SsBounds *out_bounds,
                                  double *upper_per_depth,
                                  double *lower_per_depth,
                                  uintptr_t per_depth_len);

/**
 * Per-period growth of the periodic family word at `s_n`.
 *
 * # Safety
 * `out_value` must be writable.
 */
enum SsStatus ss_growth_factor(uintptr_t n, double *out_value);

/**
 * Largest number of consecutive blocks, each using all `m` symbols, that
 * the word splits into.
 *
 * # Safety
 * `indices` must point to `len` readable values; `out_value` must be writable.
 */
enum SsStatus ss_regularity_index(uintptr_t m,
                                  const uintptr_t *indices,
                                  uintptr_t len,
                                  uintptr_t *out_value);

/**
 * Exact criterion for the two-member mixing class with rows
 * `(a11, a12)` and `(a21, a22)`.
 *
 * # Safety
 * Both out pointers must be writable.
 */
enum SsStatus ss_r2_criterion(double a11,
                              double a12,
                              double a21,
                              double a22,
                              double tau,
                              enum SsCriterionVerdict *out_verdict,
                              enum SsR2Case *out_case);

/**
 * Criterion for mixing classes with strictly positive coefficients, given as
 * an `n×n` row-major array.
 *
 * # Safety
 * `coefficients` must point to `n·n` readable doubles; both out pointers
 * must be writable.
 */
enum SsStatus ss_rplus_criterion(const double *coefficients,
                                 uintptr_t n,
                                 double tau,
                                 enum SsCriterionVerdict *out_verdict,
                                 double *out_perron_root);

/**
 * Builds the depth-`depth` truncated extremal norm with rate `q`. A `q` of
 * zero or below selects the rate automatically from product bounds.
 *
 * # Safety
 * `class` must be a live handle and `out_norm` writable.
 */
enum SsStatus ss_norm_build(const struct SsClass *class_,
                            double q,
                            uintptr_t depth,
                            struct SsNorm **out_norm);

/**
 * Rate `q` of a built norm.
 *
 * # Safety
 * `norm` must be a live handle and `out_q` writable.
 */
enum SsStatus ss_norm_rate(const struct SsNorm *norm, double *out_q);

/**
 * Norm of the vector `x` of length `len`.
 *
 * # Safety
 * `norm` must be a live handle, `x` readable for `len` doubles and
 * `out_value` writable.
 */
enum SsStatus ss_norm_evaluate(const struct SsNorm *norm,
                               const double *x,
                               uintptr_t len,
                               double *out_value);

/**
 * # Safety
 * `norm` must come from [`ss_norm_build`] and not be used again.
 */
void ss_norm_free(struct SsNorm *norm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWITCHSTAB_H */
