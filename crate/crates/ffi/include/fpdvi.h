#ifndef FPDVI_H
#define FPDVI_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum FpdviStatus {
  FPDVI_STATUS_OK = 0,
  FPDVI_STATUS_NULL_POINTER = 1,
  FPDVI_STATUS_INVALID_UTF8 = 2,
  /**
   * The problem could not be read, parsed or validated.
   */
  FPDVI_STATUS_INPUT_ERROR = 3,
  /**
   * Picard iteration hit its outer-iteration cap. A solution handle is
   * still produced.
   */
  FPDVI_STATUS_NOT_CONVERGED = 4,
  FPDVI_STATUS_NUMERIC_ERROR = 5,
  /**
   * A caller buffer is too short.
   */
  FPDVI_STATUS_BUFFER_TOO_SMALL = 6,
  FPDVI_STATUS_PANIC = 7,
} FpdviStatus;

/**
 * Opaque problem handle.
 */
typedef struct FpdviProblem FpdviProblem;

/**
 * Opaque solution handle.
 */
typedef struct FpdviSolution FpdviSolution;

/**
 * Scalar diagnostics of a solve.
 */
typedef struct FpdviSummary {
  bool converged;
  size_t iterations;
  double final_change;
  double fixed_point_defect;
  double nonlocal_defect;
  double max_vi_residual;
} FpdviSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a problem from a JSON document in the problem-file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FpdviStatus fpdvi_problem_from_json(const char *json, struct FpdviProblem **out);

/**
 * Loads a problem file from `path`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FpdviStatus fpdvi_problem_from_file(const char *path, struct FpdviProblem **out);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must come from this library and not be used afterwards.
 */
void fpdvi_problem_free(struct FpdviProblem *problem);

/**
 * State dimension `n`, or 0 for null.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t fpdvi_problem_state_dim(const struct FpdviProblem *problem);

/**
 * Control dimension `m`, or 0 for null.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t fpdvi_problem_control_dim(const struct FpdviProblem *problem);

/**
 * Solves with the grid and solver options of the problem file. On
 * [`FpdviStatus::NotConverged`] `out` still receives the last iterate.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum FpdviStatus fpdvi_solve(const struct FpdviProblem *problem, struct FpdviSolution **out);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must come from this library and not be used afterwards.
 */
void fpdvi_solution_free(struct FpdviSolution *solution);

/**
 * Number of grid nodes `N + 1`, or 0 for null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t fpdvi_solution_node_count(const struct FpdviSolution *solution);

/**
 * Copies the grid nodes into `buf` (`node_count` values).
 *
 * # Safety
 * `solution` must be a live handle and `buf` valid for `len` writes.
 */
enum FpdviStatus fpdvi_solution_times(const struct FpdviSolution *solution,
                                      double *buf,
                                      size_t len);

/**
 * Copies the states row-major, one row of `n` values per node.
 *
 * # Safety
 * `solution` must be a live handle and `buf` valid for `len` writes.
 */
enum FpdviStatus fpdvi_solution_states(const struct FpdviSolution *solution,
                                       double *buf,
                                       size_t len);

/**
 * Copies the controls row-major, one row of `m` values per node.
 *
 * # Safety
 * `solution` must be a live handle and `buf` valid for `len` writes.
 */
enum FpdviStatus fpdvi_solution_controls(const struct FpdviSolution *solution,
                                         double *buf,
                                         size_t len);

/**
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum FpdviStatus fpdvi_solution_summary(const struct FpdviSolution *solution,
                                        struct FpdviSummary *out);

/**
 * Real Mittag-Leffler function `E_{alpha,beta}(x)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FpdviStatus fpdvi_mittag_leffler(double alpha, double beta, double x, double *out);

/**
 * Message of the last failing call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *fpdvi_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fpdvi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPDVI_H */
