#ifndef TQBEAM_H
#define TQBEAM_H

/* Generated by cbindgen from tqbeam-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum TqStatus {
  TQ_STATUS_OK = 0,
  TQ_STATUS_NULL_POINTER = 1,
  TQ_STATUS_INVALID_INPUT = 2,
  TQ_STATUS_NOT_POSITIVE_DEFINITE = 3,
  TQ_STATUS_NOT_PSD = 4,
  TQ_STATUS_CONVERGENCE_FAILURE = 5,
  TQ_STATUS_SINGULAR_CHANNEL = 6,
  TQ_STATUS_INFEASIBLE_BD = 7,
  TQ_STATUS_CONFIG_ERROR = 8,
  TQ_STATUS_IO_ERROR = 9,
  TQ_STATUS_BUFFER_TOO_SMALL = 10,
  TQ_STATUS_PANIC = 11,
} TqStatus;

// Outer beamformer design selector.
typedef enum TqMethod {
  TQ_METHOD_TQP = 0,
  TQ_METHOD_P3_SVD = 1,
  TQ_METHOD_WEIGHTED_DIFF = 2,
  TQ_METHOD_BD = 3,
} TqMethod;

// Opaque outer beamformer handle.
typedef struct TqOuterBeamformer TqOuterBeamformer;

// Opaque system description handle.
typedef struct TqScenario TqScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *tq_version(void);

// Static name of a status code.
const char *tq_status_name(enum TqStatus status);

// Copies the last error message of the calling thread into `buf`
// (NUL-terminated, truncated to `len`). Returns the full message length
// in bytes, excluding the terminator.
//
// # Safety
// `buf` must point to at least `len` writable bytes, or be NULL with
// `len == 0` to query the length alone.
size_t tq_last_error_message(char *buf, size_t len);

// Builds a scenario whose per-group covariances follow the one-ring
// scattering model.
//
// `theta_rad`, `delta_rad`, `users`, and `outer_dim` are per-group arrays
// of length `groups`. On success writes a handle to `out`; free it with
// [`tq_scenario_free`].
//
// # Safety
// The four array pointers must reference `groups` readable elements and
// `out` must be a valid pointer.
enum TqStatus tq_scenario_one_ring(size_t antennas,
                                   size_t groups,
                                   const double *theta_rad,
                                   const double *delta_rad,
                                   const size_t *users,
                                   const size_t *outer_dim,
                                   double spacing,
                                   double noise_power,
                                   double total_power,
                                   struct TqScenario **out);

// Releases a scenario handle. NULL is ignored.
//
// # Safety
// `scenario` must be NULL or a pointer returned by a scenario constructor
// that has not been freed yet.
void tq_scenario_free(struct TqScenario *scenario);

// Number of base-station antennas.
//
// # Safety
// `scenario` must be a live handle.
size_t tq_scenario_antennas(const struct TqScenario *scenario);

// Number of user groups.
//
// # Safety
// `scenario` must be a live handle.
size_t tq_scenario_groups(const struct TqScenario *scenario);

// Designs the outer beamformer of one group.
//
// `eps` and `max_iter` control the trace-quotient iteration, `weight` the
// fixed-weight baseline, and `energy_threshold` the BD dominant-eigenspace
// retention; parameters not used by the chosen method are ignored. On
// success writes a handle to `out`; free it with [`tq_outer_free`].
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum TqStatus tq_outer_design(const struct TqScenario *scenario,
                              size_t group,
                              enum TqMethod method,
                              double eps,
                              size_t max_iter,
                              double weight,
                              double energy_threshold,
                              struct TqOuterBeamformer **out);

// Releases an outer beamformer handle. NULL is ignored.
//
// # Safety
// `beamformer` must be NULL or a live handle.
void tq_outer_free(struct TqOuterBeamformer *beamformer);

// Rows of the beamformer matrix (antenna count).
//
// # Safety
// `beamformer` must be a live handle.
size_t tq_outer_rows(const struct TqOuterBeamformer *beamformer);

// Columns of the beamformer matrix (outer dimension).
//
// # Safety
// `beamformer` must be a live handle.
size_t tq_outer_cols(const struct TqOuterBeamformer *beamformer);

// Iterations the design took (0 for the one-shot methods).
//
// # Safety
// `beamformer` must be a live handle.
size_t tq_outer_iterations(const struct TqOuterBeamformer *beamformer);

// Length of the objective trace (0 for the one-shot methods).
//
// # Safety
// `beamformer` must be a live handle.
size_t tq_outer_objective_len(const struct TqOuterBeamformer *beamformer);

// Copies the objective trace into `buf`.
//
// # Safety
// `beamformer` must be a live handle and `buf` must point to at least
// `len` writable doubles.
enum TqStatus tq_outer_objective(const struct TqOuterBeamformer *beamformer,
                                 double *buf,
                                 size_t len);

// Copies the beamformer matrix into `buf` as row-major interleaved
// (re, im) pairs; `len` counts doubles and must be at least
// `2 * rows * cols`.
//
// # Safety
// `beamformer` must be a live handle and `buf` must point to at least
// `len` writable doubles.
enum TqStatus tq_outer_matrix(const struct TqOuterBeamformer *beamformer, double *buf, size_t len);

// Runs one experiment from a JSON configuration string and writes the CSV
// (and optional JSON mirror) to the given paths.
//
// `experiment` is one of `sumrate`, `as-sweep`, `convergence`, `power`;
// `json_path` may be NULL; `threads = 0` uses the default worker pool. The
// emitted bytes are identical for every thread count.
//
// # Safety
// All non-NULL pointers must reference NUL-terminated strings.
enum TqStatus tq_run_experiment_json(const char *config_json,
                                     const char *experiment,
                                     const char *csv_path,
                                     const char *json_path,
                                     size_t threads);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TQBEAM_H */
