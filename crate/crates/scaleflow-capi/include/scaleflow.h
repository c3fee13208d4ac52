#ifndef SCALEFLOW_H
#define SCALEFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Basis family of a path.
 */
typedef enum {
  SF_BOUNDARY_PERIODIC = 0,
  SF_BOUNDARY_LAGRANGIAN = 1,
} SfBoundary;

/**
 * Sign map kinds for the fundamental operator.
 */
typedef enum {
  SF_SIGN_PLUS = 0,
  SF_SIGN_MINUS = 1,
  SF_SIGN_FLOER_PERIODIC = 2,
  SF_SIGN_FLOER_LAGRANGIAN = 3,
} SfSign;

/**
 * Result of every fallible call.
 */
typedef enum {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_ARGUMENT = 2,
  SF_STATUS_CONFIG = 3,
  SF_STATUS_PRECONDITION = 4,
  SF_STATUS_VALIDATION = 5,
  SF_STATUS_UNSUPPORTED = 6,
  SF_STATUS_SINGULAR = 7,
  SF_STATUS_BLOW_UP = 8,
  SF_STATUS_IO = 9,
  SF_STATUS_INTERNAL = 10,
} SfStatus;

typedef struct SfField SfField;

typedef struct SfPath SfPath;

typedef struct SfScaleVector SfScaleVector;

typedef struct SfTrajectory SfTrajectory;

typedef struct SfWeight SfWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the calling thread's last error message (NUL-terminated) into
 * `buffer`; returns the number of bytes the full message needs.
 */
size_t sf_last_error_message(char *buffer, size_t capacity);

/**
 * Static version string of the library.
 */
const char *sf_version(void);

/**
 * Release a weight handle; a null pointer is a no-op.
 */
void sf_weight_free(SfWeight *handle);

/**
 * Release a scale-vector handle; a null pointer is a no-op.
 */
void sf_scale_vector_free(SfScaleVector *handle);

/**
 * Release a path handle; a null pointer is a no-op.
 */
void sf_path_free(SfPath *handle);

/**
 * Release a field handle; a null pointer is a no-op.
 */
void sf_field_free(SfField *handle);

/**
 * Release a trajectory handle; a null pointer is a no-op.
 */
void sf_trajectory_free(SfTrajectory *handle);

/**
 * f(nu) = nu^exponent, exponent > 0.
 */
SfStatus sf_weight_power_new(double exponent, SfWeight **out);

/**
 * The loop-model weight for complex dimension n.
 */
SfStatus sf_weight_floer_periodic_new(size_t n, SfWeight **out);

/**
 * f(nu), nu >= 1.
 */
SfStatus sf_weight_eval(const SfWeight *weight, uint64_t nu, double *out);

/**
 * Build a scale vector from parallel (index, value) arrays.
 */
SfStatus sf_scale_vector_new(const SfWeight *weight,
                             const uint64_t *indices,
                             const double *values,
                             size_t len,
                             SfScaleVector **out);

SfStatus sf_scale_vector_level_norm(const SfScaleVector *vector, int32_t level, double *out);

SfStatus sf_scale_vector_tail_norm(const SfScaleVector *vector,
                                   uint64_t cut,
                                   int32_t level,
                                   double *out);

/**
 * Apply the fundamental operator (or its coefficient-wise inverse).
 */
SfStatus sf_scale_vector_fundamental(const SfScaleVector *vector,
                                     SfSign sign,
                                     size_t n,
                                     bool invert,
                                     SfScaleVector **out);

/**
 * A(x) = 1/2 sum zeta sqrt(f) x^2.
 */
SfStatus sf_scale_vector_quadratic_action(const SfScaleVector *vector,
                                          SfSign sign,
                                          size_t n,
                                          double *out);

/**
 * Build a path from an interleaved coefficient block of length
 * `2 * (2*order + 1) * n` (re, im per coefficient; mode -order first).
 */
SfStatus sf_path_new(size_t n,
                     SfBoundary basis,
                     size_t order,
                     const double *coeffs,
                     size_t len,
                     SfPath **out);

SfStatus sf_path_order(const SfPath *path, size_t *out);

SfStatus sf_path_dim(const SfPath *path, size_t *out);

/**
 * Copy the interleaved coefficient block; the required length is always
 * written through `written`.
 */
SfStatus sf_path_coeffs(const SfPath *path, double *buffer, size_t capacity, size_t *written);

SfStatus sf_path_sobolev_norm(const SfPath *path, int32_t level, double *out);

/**
 * The diagonal operator with multiplier (2 pi j + 1/2) resp. (pi j + 1/2).
 */
SfStatus sf_path_floer_fundamental(const SfPath *path, SfPath **out);

/**
 * x(t) -> x(t - tau); loops only.
 */
SfStatus sf_path_time_shift(const SfPath *path, double tau, SfPath **out);

/**
 * Double a boundary path to its reflection-symmetric loop.
 */
SfStatus sf_path_reflect_to_loop(const SfPath *path, SfPath **out);

/**
 * Restrict a reflection-symmetric loop back to a boundary path.
 */
SfStatus sf_path_restrict_to_path(const SfPath *path, double tolerance, SfPath **out);

/**
 * Build a field from a JSON model descriptor, e.g.
 * `{"n":1,"field":{"kind":"quadratic","gamma":1.0}}` (the same catalog and
 * shape as the scenario files).
 */
SfStatus sf_field_from_json(const char *descriptor, SfField **out);

/**
 * V(x), truncated to the order of x.
 */
SfStatus sf_field_eval(const SfField *field, const SfPath *path, SfPath **out);

/**
 * Diagonal rate of the field on mode j (complex for delay terms).
 */
SfStatus sf_field_linear_multiplier(const SfField *field,
                                    int64_t mode,
                                    double *out_re,
                                    double *out_im);

/**
 * Integrate the truncated flow through x0 on [-t_half, t_half]: the stiff
 * exponential integrator when `rtol <= 0`, the adaptive embedded pair
 * otherwise.  Escaping the ceiling returns `BlowUp`.
 */
SfStatus sf_integrate(const SfField *field,
                      const SfPath *x0,
                      double t_half,
                      size_t samples,
                      double step,
                      double ceiling,
                      double rtol,
                      SfTrajectory **out);

SfStatus sf_trajectory_samples(const SfTrajectory *trajectory, size_t *out);

/**
 * Copy of the state at grid index i.
 */
SfStatus sf_trajectory_state(const SfTrajectory *trajectory, size_t index, SfPath **out);

/**
 * Max interior defect || ds w - V(w) ||_0 by independent differencing.
 */
SfStatus sf_trajectory_residual(const SfField *field, const SfTrajectory *trajectory, double *out);

/**
 * Action drop and flow energy of an elementary trajectory.
 */
SfStatus sf_energy_identity(const SfField *field,
                            const SfTrajectory *trajectory,
                            double *out_action_drop,
                            double *out_energy);

/**
 * Serialize a trajectory to the JSON-lines wire format (header record with
 * the field descriptor, one state per line).  The required byte length,
 * including the NUL, is always written through `written`; call with a null
 * buffer to size it.
 */
SfStatus sf_trajectory_to_jsonl(const SfField *field,
                                const SfTrajectory *trajectory,
                                char *buffer,
                                size_t capacity,
                                size_t *written);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SCALEFLOW_H */
