#ifndef WARPCD_H
#define WARPCD_H

/* Generated by cbindgen from the warpcd-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum WarpcdStatus {
  WARPCD_STATUS_OK = 0,
  WARPCD_STATUS_NULL_POINTER = 1,
  WARPCD_STATUS_INVALID_ARGUMENT = 2,
  WARPCD_STATUS_PARSE_ERROR = 3,
  WARPCD_STATUS_SOLVER_FAILED = 4,
  WARPCD_STATUS_INTERNAL_ERROR = 5,
} WarpcdStatus;

/**
 * Opaque warped-product handle.
 */
typedef struct WarpcdProduct WarpcdProduct;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static NUL-terminated string.
 */
const char *warpcd_version(void);

/**
 * Build a warped product from a JSON descriptor (same schema as the CLI's
 * `space` object). On success writes an owned handle to `out`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be valid for a
 * single pointer write.
 */
enum WarpcdStatus warpcd_product_from_json(const char *json, struct WarpcdProduct **out);

/**
 * Release a handle returned by `warpcd_product_from_json`.
 *
 * # Safety
 * `handle` must be a pointer previously returned by this library (or null).
 */
void warpcd_product_free(struct WarpcdProduct *handle);

/**
 * Distance between two points given in chart coordinates. A `fiber_len` of
 * zero denotes a collapsed point (no fiber coordinate).
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum WarpcdStatus warpcd_distance(const struct WarpcdProduct *handle,
                                  const double *base0,
                                  uintptr_t base0_len,
                                  const double *fiber0,
                                  uintptr_t fiber0_len,
                                  const double *base1,
                                  uintptr_t base1_len,
                                  const double *fiber1,
                                  uintptr_t fiber1_len,
                                  double tolerance,
                                  double *out);

/**
 * Warped-product Ricci curvature of a tangent vector; minus infinity is a
 * legitimate output value.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum WarpcdStatus warpcd_ricci(const struct WarpcdProduct *handle,
                               const double *base,
                               uintptr_t base_len,
                               const double *fiber,
                               uintptr_t fiber_len,
                               const double *base_part,
                               uintptr_t base_part_len,
                               const double *fiber_part,
                               uintptr_t fiber_part_len,
                               double *out);

/**
 * Generalized sine of the curvature comparison system.
 */
double warpcd_sn(double k, double t);

/**
 * Generalized cosine of the curvature comparison system.
 */
double warpcd_cn(double k, double t);

/**
 * Inner distortion coefficient; +inf past the critical length, NaN outside
 * the parameter domain.
 */
double warpcd_sigma(double k, double n_minus_1, double t, double theta);

/**
 * Volume distortion coefficient; +inf past the critical length, NaN outside
 * the parameter domain.
 */
double warpcd_tau(double k, double n, double t, double theta);

/**
 * Run a full experiment config (the CLI JSON schema) and write the CSV
 * artifact to `out_path`. Returns the CLI exit code semantics: 0 success,
 * 1 config error, 2 solver non-convergence, 3 invariant violation.
 *
 * # Safety
 * `config_json` and `out_path` must be valid NUL-terminated strings.
 */
int32_t warpcd_run_config(const char *config_json,
                          uint64_t seed,
                          bool reproducible,
                          const char *out_path);

/**
 * Last-resort helper for bindings that want the version as an owned string;
 * free with `warpcd_string_free`.
 */
char *warpcd_version_owned(void);

/**
 * # Safety
 * `s` must come from `warpcd_version_owned` (or be null).
 */
void warpcd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WARPCD_H */
