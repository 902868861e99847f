#ifndef NOON_DIFFUSION_H
#define NOON_DIFFUSION_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NdStatus {
  ND_STATUS_OK = 0,
  ND_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: bad UTF-8, schema violations, unknown enum values.
   */
  ND_STATUS_INVALID_INPUT = 2,
  /**
   * A physics guard rejected the request (Δ < δ, repeated G, ...).
   */
  ND_STATUS_PHYSICS = 3,
  /**
   * The curve shows no resolvable attenuation.
   */
  ND_STATUS_DEGENERATE = 4,
  ND_STATUS_PANIC = 5,
} NdStatus;

typedef enum NdRepresentation {
  ND_REPRESENTATION_DICKE_SUBSPACE = 0,
  ND_REPRESENTATION_FULL_TENSOR = 1,
} NdRepresentation;

typedef enum NdFitMethod {
  ND_FIT_METHOD_LOG_LINEAR = 0,
  ND_FIT_METHOD_NONLINEAR_LS = 1,
} NdFitMethod;

/**
 * Opaque attenuation curve under construction.
 */
typedef struct NdCurve NdCurve;

/**
 * Opaque spin system.
 */
typedef struct NdSpinSystem NdSpinSystem;

typedef struct NdFitResult {
  /**
   * m² s^-1.
   */
  double d_fit;
  double d_sigma;
  double s0_fit;
  double residual_rms;
  size_t iterations;
  bool degenerate;
} NdFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *nd_last_error(void);

/**
 * Builds a spin system of one control and `n_total - 1` targets.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NdStatus nd_spin_system_new(double control_gamma,
                                 double target_gamma,
                                 size_t n_total,
                                 double j_coupling_hz,
                                 enum NdRepresentation representation,
                                 struct NdSpinSystem **out);

/**
 * γ_A + (N-1)·γ_M of the system.
 *
 * # Safety
 * `system` must be a live handle and `out` writable.
 */
enum NdStatus nd_spin_system_gamma_eff(const struct NdSpinSystem *system, double *out);

/**
 * # Safety
 * `system` must be null or a handle from [`nd_spin_system_new`] not yet freed.
 */
void nd_spin_system_free(struct NdSpinSystem *system);

/**
 * Starts an empty curve for the given echo timing and gradient-weighted
 * order (rad s^-1 T^-1).
 *
 * # Safety
 * `out` must be writable.
 */
enum NdStatus nd_curve_new(double little_delta_s,
                           double big_delta_s,
                           double q_gamma,
                           struct NdCurve **out);

/**
 * Appends a point; pass NaN as `sigma` when there is no standard error.
 *
 * # Safety
 * `curve` must be a live handle.
 */
enum NdStatus nd_curve_push(struct NdCurve *curve, double g, double s, double sigma);

/**
 * # Safety
 * `curve` must be a live handle.
 */
size_t nd_curve_len(const struct NdCurve *curve);

/**
 * # Safety
 * `curve` must be null or a handle from [`nd_curve_new`] not yet freed.
 */
void nd_curve_free(struct NdCurve *curve);

/**
 * Fits S = S₀ exp(-bD). A degenerate curve still fills `out` and returns
 * `ND_STATUS_DEGENERATE`.
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum NdStatus nd_fit_diffusion(const struct NdCurve *curve,
                               enum NdFitMethod method,
                               size_t bootstrap_samples,
                               uint64_t seed,
                               struct NdFitResult *out);

/**
 * exp(-(qGδ)² D (Δ - δ/3)).
 *
 * # Safety
 * `out` must be writable.
 */
enum NdStatus nd_stejskal_tanner(double g,
                                 double little_delta_s,
                                 double big_delta_s,
                                 double d,
                                 double q_gamma,
                                 double *out);

/**
 * kT / (6πηr) in m² s^-1.
 *
 * # Safety
 * `out` must be writable.
 */
enum NdStatus nd_stokes_einstein(double temperature_k,
                                 double viscosity_pa_s,
                                 double radius_m,
                                 double *out);

/**
 * Runs a descriptor (JSON text) and returns the run report as JSON. The
 * descriptor must carry its seed.
 *
 * # Safety
 * `descriptor_json` must be a NUL-terminated string and `out` writable.
 * The returned string is released with [`nd_string_free`].
 */
enum NdStatus nd_simulate_json(const char *descriptor_json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void nd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOON_DIFFUSION_H */
