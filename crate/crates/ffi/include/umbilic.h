#ifndef UMBILIC_H
#define UMBILIC_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum UmbStatus {
  UMB_STATUS_OK = 0,
  UMB_STATUS_NULL_POINTER = 1,
  UMB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The point or parameters are outside the domain of the computation
   * (singular point, off the surface, non-periodic orbit, ...).
   */
  UMB_STATUS_DOMAIN = 3,
  UMB_STATUS_INVALID_UTF8 = 4,
  UMB_STATUS_PANIC = 5,
} UmbStatus;

/**
 * Opaque catalog surface.
 */
typedef struct UmbSurface UmbSurface;

/**
 * Scalar invariants at a point.
 */
typedef struct UmbReport {
  double alpha;
  double k;
  double l;
  double mean_curvature;
  double xn_residual;
  double spread;
  bool umbilic;
} UmbReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *umb_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *umb_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void umb_string_free(char *s);

/**
 * Creates a catalog surface by name (`pansu`, `heisenberg-sphere`,
 * `shifted-sphere`, `cylinder`, `hyperplane`) with `count` named parameters.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `keys` and `values` must hold
 * `count` entries (they may be null when `count` is 0); `out` must be valid.
 */
enum UmbStatus umb_surface_new(const char *name,
                               size_t n,
                               const char *const *keys,
                               const double *values,
                               size_t count,
                               struct UmbSurface **out);

/**
 * # Safety
 * `s` must come from [`umb_surface_new`] or be null.
 */
void umb_surface_free(struct UmbSurface *s);

/**
 * Scalar invariants at the on-surface point `coords = (x.., y.., t)`.
 *
 * # Safety
 * `s` must be a live surface, `coords` must hold `len` values, `out` must be
 * valid.
 */
enum UmbStatus umb_surface_report(const struct UmbSurface *s,
                                  const double *coords,
                                  size_t len,
                                  struct UmbReport *out);

/**
 * The full report as JSON; free the string with [`umb_string_free`].
 *
 * # Safety
 * As for [`umb_surface_report`].
 */
enum UmbStatus umb_surface_report_json(const struct UmbSurface *s,
                                       const double *coords,
                                       size_t len,
                                       char **out);

/**
 * Period and closure error of the orbit of the `(α, β)` system through
 * `(alpha, beta)`.
 *
 * # Safety
 * `period` and `closure` must be valid.
 */
enum UmbStatus umb_phase_period(size_t n,
                                double c,
                                double alpha,
                                double beta,
                                double *period,
                                double *closure);

/**
 * End state of the curvature-`lambda` geodesic from `(coords, v)` after
 * length `s_max`: writes `2n+1` coordinates to `end_coords` and `2n` frame
 * coefficients to `end_v`.
 *
 * # Safety
 * `coords`/`end_coords` must hold `len` values, `v`/`end_v` `len − 1`.
 */
enum UmbStatus umb_geodesic_end(const double *coords,
                                const double *v,
                                size_t len,
                                double lambda,
                                double s_max,
                                double *end_coords,
                                double *end_v);

/**
 * Runs the claim verification and returns the JSON report. `only` may be
 * null. `passed` receives whether every claim passed.
 *
 * # Safety
 * `only` must be null or a NUL-terminated string; `out` and `passed` must
 * be valid.
 */
enum UmbStatus umb_verify_json(uint64_t seed, const char *only, char **out, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UMBILIC_H */
