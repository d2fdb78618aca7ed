#ifndef COVTHRESH_H
#define COVTHRESH_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_INPUT = 2,
  CT_STATUS_DIMENSION_MISMATCH = 3,
  CT_STATUS_NOT_POSITIVE_DEFINITE = 4,
  CT_STATUS_INFEASIBLE = 5,
  CT_STATUS_BUFFER_TOO_SMALL = 6,
  CT_STATUS_PANIC = 99,
} CtStatus;

/**
 * Symmetric matrix handle.
 */
typedef struct CtMatrix CtMatrix;

/**
 * Screened graphical lasso solution handle.
 */
typedef struct CtSolution CtSolution;

/**
 * Solver settings. Obtain defaults from [`ct_solver_config_default`].
 */
typedef struct CtSolverConfig {
  double kkt_tol;
  double conv_tol;
  double support_tol;
  size_t max_outer;
  size_t max_inner;
} CtSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *ct_last_error_message(void);

struct CtSolverConfig ct_solver_config_default(void);

/**
 * Copies a `p x p` row-major matrix. It must be exactly symmetric.
 *
 * # Safety
 * `data` must point to `p * p` readable doubles and `out` to a writable slot.
 */
enum CtStatus ct_matrix_new(const double *data, size_t p, struct CtMatrix **out);

/**
 * Sample covariance (divisor `n`) of an `n x p` row-major data matrix.
 *
 * # Safety
 * `data` must point to `n * p` readable doubles and `out` to a writable slot.
 */
enum CtStatus ct_sample_covariance(const double *data,
                                   size_t n,
                                   size_t p,
                                   bool center,
                                   bool correlation,
                                   struct CtMatrix **out);

/**
 * # Safety
 * `m` must be NULL or a handle from this library not yet freed.
 */
void ct_matrix_free(struct CtMatrix *m);

/**
 * Dimension of the matrix, 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t ct_matrix_dim(const struct CtMatrix *m);

/**
 * Copies the matrix into `buf` (row-major, `len >= p * p`).
 *
 * # Safety
 * `m` must be a live handle and `buf` must hold `len` writable doubles.
 */
enum CtStatus ct_matrix_copy(const struct CtMatrix *m, double *buf, size_t len);

/**
 * Component labels of the graph `|S_ij| > lambda`. Writes `p` labels into
 * `labels` (blocks numbered by smallest member) and the block count into
 * `num_blocks`.
 *
 * # Safety
 * `s` must be a live handle, `labels` must hold `len` writable entries and
 * `num_blocks` must be writable.
 */
enum CtStatus ct_partition(const struct CtMatrix *s,
                           double lambda,
                           size_t *labels,
                           size_t len,
                           size_t *num_blocks);

/**
 * Smallest critical penalty whose components all have at most `p_max` nodes.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum CtStatus ct_lambda_for_max_component(const struct CtMatrix *s, size_t p_max, double *out);

/**
 * Solves the penalized problem component by component. `cfg` may be NULL
 * for defaults. A solution that hit the iteration cap is still returned;
 * check [`ct_solution_converged`].
 *
 * # Safety
 * `s` must be a live handle, `cfg` NULL or readable, `out` writable.
 */
enum CtStatus ct_screen_solve(const struct CtMatrix *s,
                              double lambda,
                              const struct CtSolverConfig *cfg,
                              struct CtSolution **out);

/**
 * # Safety
 * `sol` must be NULL or a handle from this library not yet freed.
 */
void ct_solution_free(struct CtSolution *sol);

/**
 * # Safety
 * `sol` must be NULL or a live handle.
 */
size_t ct_solution_dim(const struct CtSolution *sol);

/**
 * Objective value, NaN for NULL.
 *
 * # Safety
 * `sol` must be NULL or a live handle.
 */
double ct_solution_objective(const struct CtSolution *sol);

/**
 * # Safety
 * `sol` must be NULL or a live handle.
 */
bool ct_solution_converged(const struct CtSolution *sol);

/**
 * # Safety
 * `sol` must be NULL or a live handle.
 */
size_t ct_solution_num_blocks(const struct CtSolution *sol);

/**
 * Largest KKT violation of the assembled solution, NaN for NULL.
 *
 * # Safety
 * `sol` must be NULL or a live handle.
 */
double ct_solution_kkt_violation(const struct CtSolution *sol);

/**
 * Copies the estimated precision matrix (row-major, `len >= p * p`).
 *
 * # Safety
 * `sol` must be a live handle and `buf` must hold `len` writable doubles.
 */
enum CtStatus ct_solution_theta(const struct CtSolution *sol, double *buf, size_t len);

/**
 * Copies the estimated covariance matrix (row-major, `len >= p * p`).
 *
 * # Safety
 * `sol` must be a live handle and `buf` must hold `len` writable doubles.
 */
enum CtStatus ct_solution_w(const struct CtSolution *sol, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVTHRESH_H */
