#ifndef PROJLINK_H
#define PROJLINK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed or inconsistent input: schema, dimension or value errors.
   */
  PL_STATUS_INVALID_INPUT = 3,
  /**
   * The numerics could not certify a result, e.g. a divisor meets the curve.
   */
  PL_STATUS_NUMERICAL = 4,
  PL_STATUS_PANIC = 5,
} PlStatus;

/**
 * Positive holomorphic 1-chain.
 */
typedef struct PlChain PlChain;

/**
 * Closed curve in CP^n.
 */
typedef struct PlCurve PlCurve;

/**
 * Homogeneous polynomial section of O(d).
 */
typedef struct PlSection PlSection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pl_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next `pl_*` call on the same thread.
 */
const char *pl_last_error_message(void);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum PlStatus pl_curve_from_json(const char *json, struct PlCurve **out);

/**
 * # Safety
 * `curve` must come from `pl_curve_from_json` and not be used afterwards.
 */
void pl_curve_free(struct PlCurve *curve);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum PlStatus pl_section_from_json(const char *json, struct PlSection **out);

/**
 * Section from coefficient arrays in monomial order (lexicographic, the
 * exponent of `z0` descending first).
 *
 * # Safety
 * `re` and `im` must hold `len` doubles each and `out` must be writable.
 */
enum PlStatus pl_section_new(size_t dimension,
                             uint32_t degree,
                             const double *re,
                             const double *im,
                             size_t len,
                             struct PlSection **out);

/**
 * # Safety
 * `section` must come from a section constructor and not be used afterwards.
 */
void pl_section_free(struct PlSection *section);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum PlStatus pl_chain_from_json(const char *json, struct PlChain **out);

/**
 * # Safety
 * `chain` must come from `pl_chain_from_json` and not be used afterwards.
 */
void pl_chain_free(struct PlChain *chain);

/**
 * Projective winding number with default quadrature settings. `error` may
 * be NULL.
 *
 * # Safety
 * Handles must be live; `value` must be writable.
 */
enum PlStatus pl_winding_number(const struct PlCurve *curve,
                                const struct PlSection *section,
                                double *value,
                                double *error);

/**
 * Projective linking number through `chain`, or through a cone with a
 * random apex drawn from `seed` when `chain` is NULL.
 *
 * # Safety
 * Handles must be live; `value` must be writable.
 */
enum PlStatus pl_projective_linking(const struct PlCurve *curve,
                                    const struct PlSection *section,
                                    const struct PlChain *chain,
                                    uint64_t seed,
                                    double *value);

/**
 * # Safety
 * Handles must be live; `value` must be writable.
 */
enum PlStatus pl_affine_linking(const struct PlCurve *curve,
                                const struct PlSection *section,
                                int64_t *value);

/**
 * # Safety
 * `chain` must be live; `value` must be writable.
 */
enum PlStatus pl_chain_mass(const struct PlChain *chain, double *value);

/**
 * Minimal-mass estimate `max(0, −inf Wind~)` over sections of degree
 * `1..=max_degree`. `restarts` of 0 keeps the default.
 *
 * # Safety
 * `curve` must be live; `value` must be writable.
 */
enum PlStatus pl_estimate_minimal_mass(const struct PlCurve *curve,
                                       uint32_t max_degree,
                                       size_t restarts,
                                       uint64_t seed,
                                       double *value);

/**
 * Running maximum of the best constants `C_d` at the point with
 * homogeneous coordinates `re + i im` over degrees `1..=max_degree`.
 *
 * # Safety
 * `curve` must be live, `re` and `im` must hold `len` doubles each and
 * `value` must be writable.
 */
enum PlStatus pl_best_constant(const struct PlCurve *curve,
                               const double *re,
                               const double *im,
                               size_t len,
                               uint32_t max_degree,
                               double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROJLINK_H */
