#ifndef RHEOFLOW_H
#define RHEOFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum RheoflowStatus {
  RHEOFLOW_STATUS_OK = 0,
  RHEOFLOW_STATUS_INVALID_ARGUMENT = 1,
  RHEOFLOW_STATUS_PARSE_ERROR = 2,
  RHEOFLOW_STATUS_IO_ERROR = 3,
  RHEOFLOW_STATUS_TRAINING_DIVERGED = 4,
  RHEOFLOW_STATUS_NON_CONVERGENCE = 5,
  RHEOFLOW_STATUS_MODEL_RANGE = 6,
  RHEOFLOW_STATUS_LINEAR_SOLVER = 7,
  RHEOFLOW_STATUS_PANIC = 8,
} RheoflowStatus;

/**
 * A viscosity law: Carreau, power law or network.
 */
typedef struct RheoflowModel RheoflowModel;

/**
 * A discrete Stokes solution together with its finite element space.
 */
typedef struct RheoflowSolution RheoflowSolution;

/**
 * Constants and verdict of a well-posedness check.
 */
typedef struct RheoflowCertificate {
  double c;
  double alpha;
  double r;
  double m;
  double objective;
  double worst_f1;
  double worst_f2;
  double worst_f3;
  bool satisfied;
} RheoflowCertificate;

/**
 * Errors of a solve against the manufactured solution.
 */
typedef struct RheoflowSolveReport {
  double h;
  double err_u;
  double err_p;
  size_t newton_iterations;
  double residual_norm;
} RheoflowSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rheoflow_last_error_message(void);

/**
 * Creates a Carreau law `k_inf + (k0 - k_inf)(1 + lambda t^2)^((n-2)/2)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum RheoflowStatus rheoflow_model_carreau(double k0,
                                           double k_inf,
                                           double lambda,
                                           double n,
                                           struct RheoflowModel **out);

/**
 * Creates a power law `k0 t^(n-2)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum RheoflowStatus rheoflow_model_power_law(double k0, double n, struct RheoflowModel **out);

/**
 * Loads a network model file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` valid for writing.
 */
enum RheoflowStatus rheoflow_model_load(const char *path, struct RheoflowModel **out);

/**
 * Fits a convex or concave network with layer widths 1, 120, 56, 1 to
 * `len` samples.
 *
 * # Safety
 * `shear_rate` and `viscosity` must point to `len` readable values and
 * `out` must be valid for writing.
 */
enum RheoflowStatus rheoflow_model_fit(const double *shear_rate,
                                       const double *viscosity,
                                       size_t len,
                                       size_t epochs,
                                       uint64_t seed,
                                       struct RheoflowModel **out);

/**
 * Writes a network model to `path`. Analytic laws are rejected.
 *
 * # Safety
 * `model` must come from this library and `path` be nul-terminated.
 */
enum RheoflowStatus rheoflow_model_save(const struct RheoflowModel *model, const char *path);

/**
 * Evaluates `k(t)` and `k'(t)`. Either output pointer may be null.
 *
 * # Safety
 * `model` must come from this library; non-null outputs must be writable.
 */
enum RheoflowStatus rheoflow_model_eval(const struct RheoflowModel *model,
                                        double t,
                                        double *value,
                                        double *derivative);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void rheoflow_model_free(struct RheoflowModel *model);

/**
 * Searches constants certifying `model` on `(0, t_max]` with the default
 * search settings.
 *
 * # Safety
 * `model` must come from this library and `out` be writable.
 */
enum RheoflowStatus rheoflow_verify(const struct RheoflowModel *model,
                                    double t_max,
                                    uint64_t seed,
                                    struct RheoflowCertificate *out);

/**
 * Solves the manufactured Stokes problem on an `mesh × mesh` grid of the
 * unit square with velocity degree `degree`. The load is built from the
 * exact solution for `forcing`; errors use the exponent `r`.
 *
 * # Safety
 * Handles must come from this library; `report` and `out` must be
 * writable. `out` may be null when the solution is not needed.
 */
enum RheoflowStatus rheoflow_solve(const struct RheoflowModel *viscosity,
                                   const struct RheoflowModel *forcing,
                                   size_t mesh,
                                   size_t degree,
                                   double r,
                                   struct RheoflowSolveReport *report,
                                   struct RheoflowSolution **out);

/**
 * Evaluates the discrete velocity and pressure at `(x, y)` in the unit
 * square. Either output pointer may be null.
 *
 * # Safety
 * `solution` must come from this library; `velocity` must point to two
 * writable values when non-null.
 */
enum RheoflowStatus rheoflow_solution_eval(const struct RheoflowSolution *solution,
                                           double x,
                                           double y,
                                           double *velocity,
                                           double *pressure);

/**
 * Number of unknowns of the discrete system behind `solution`, or 0 for
 * null.
 *
 * # Safety
 * `solution` must come from this library or be null.
 */
size_t rheoflow_solution_len(const struct RheoflowSolution *solution);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must come from this library and not be used afterwards.
 */
void rheoflow_solution_free(struct RheoflowSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RHEOFLOW_H */
