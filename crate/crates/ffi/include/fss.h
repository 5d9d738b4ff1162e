#ifndef FSS_H
#define FSS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Atom placement inside each cell.
 */
typedef enum FssPlacement {
  FSS_PLACEMENT_MIDPOINT = 0,
  FSS_PLACEMENT_BARYCENTER = 1,
} FssPlacement;

/**
 * Result code of every fallible call.
 */
typedef enum FssStatus {
  FSS_STATUS_OK = 0,
  FSS_STATUS_NULL_POINTER = 1,
  /**
   * Malformed spec, bad argument or out-of-range index.
   */
  FSS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Request beyond the resolution or atom budget of a discretization.
   */
  FSS_STATUS_RESOLUTION = 3,
  /**
   * The ladder lacks the arithmetic structure the call needs.
   */
  FSS_STATUS_STRUCTURE = 4,
  /**
   * A numerical routine failed to converge.
   */
  FSS_STATUS_NUMERICAL = 5,
  /**
   * Internal panic; the handle arguments are left untouched.
   */
  FSS_STATUS_PANIC = 6,
} FssStatus;

/**
 * Opaque self-similar ladder.
 */
typedef struct FssLadder FssLadder;

/**
 * Opaque finite atomic measure.
 */
typedef struct FssMeasure FssMeasure;

/**
 * Opaque string problem: a measure with Robin coefficients.
 */
typedef struct FssProblem FssProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *fss_last_error_message(void);

/**
 * The classical middle-thirds ladder with equal weights.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FssStatus fss_ladder_cantor(struct FssLadder **out);

/**
 * Builds a ladder from `m` segments.
 *
 * `segments` holds `2m` doubles `a_1, b_1, ..., a_m, b_m`; `weights` holds
 * `m`. `orientations` may be null (all maps increasing); otherwise a
 * nonzero entry reverses the corresponding map.
 *
 * # Safety
 * The arrays must hold the stated number of elements and `out` must be
 * valid for one handle.
 */
enum FssStatus fss_ladder_new(const double *segments,
                              const double *weights,
                              const uint8_t *orientations,
                              size_t m,
                              struct FssLadder **out);

/**
 * Parses a ladder from a NUL-terminated JSON spec.
 *
 * # Safety
 * `json` must be a valid C string and `out` valid for one handle.
 */
enum FssStatus fss_ladder_from_json(const char *json, struct FssLadder **out);

/**
 * # Safety
 * `ladder` must be null or a handle from this library not yet freed.
 */
void fss_ladder_free(struct FssLadder *ladder);

/**
 * Number of segments.
 *
 * # Safety
 * `ladder` must be a live handle or null (returns 0).
 */
size_t fss_ladder_len(const struct FssLadder *ladder);

/**
 * `S^depth(id)(t)` for `t` in `[0, 1]`.
 *
 * # Safety
 * `ladder` must be a live handle and `out` valid for one double.
 */
enum FssStatus fss_ladder_eval(const struct FssLadder *ladder, double t, size_t depth, double *out);

/**
 * Spectral exponent `D` and period `T` of an arithmetic ladder.
 *
 * Returns `FSS_STATUS_STRUCTURE` when the ladder is not arithmetic.
 * `period` may be null.
 *
 * # Safety
 * `ladder` must be a live handle and `d` valid for one double.
 */
enum FssStatus fss_ladder_spectral_exponent(const struct FssLadder *ladder,
                                            double *d,
                                            double *period);

/**
 * Atomic approximation with one atom per depth-`depth` cell.
 *
 * # Safety
 * `ladder` must be a live handle and `out` valid for one handle.
 */
enum FssStatus fss_ladder_discretize(const struct FssLadder *ladder,
                                     size_t depth,
                                     enum FssPlacement placement,
                                     struct FssMeasure **out);

/**
 * Measure from `len` atoms on the carrier `[a, b]`.
 *
 * # Safety
 * `positions` and `masses` must hold `len` doubles; `out` valid for one handle.
 */
enum FssStatus fss_measure_new(const double *positions,
                               const double *masses,
                               size_t len,
                               double a,
                               double b,
                               struct FssMeasure **out);

/**
 * # Safety
 * `measure` must be null or a handle from this library not yet freed.
 */
void fss_measure_free(struct FssMeasure *measure);

/**
 * Number of atoms.
 *
 * # Safety
 * `measure` must be a live handle or null (returns 0).
 */
size_t fss_measure_len(const struct FssMeasure *measure);

/**
 * Copies positions and masses into caller buffers of `capacity` doubles.
 *
 * Either buffer may be null to skip it. Fails with
 * `FSS_STATUS_INVALID_ARGUMENT` if `capacity` is below the atom count.
 *
 * # Safety
 * Non-null buffers must be writable for `capacity` doubles.
 */
enum FssStatus fss_measure_atoms(const struct FssMeasure *measure,
                                 double *positions,
                                 double *masses,
                                 size_t capacity);

/**
 * Carrier interval `[a, b]`.
 *
 * # Safety
 * `measure` must be a live handle; `a` and `b` valid for one double each.
 */
enum FssStatus fss_measure_carrier(const struct FssMeasure *measure, double *a, double *b);

/**
 * Restriction to `[c, d]`, carried on `[c, d]`.
 *
 * # Safety
 * `measure` must be a live handle and `out` valid for one handle.
 */
enum FssStatus fss_measure_restrict(const struct FssMeasure *measure,
                                    double c,
                                    double d,
                                    struct FssMeasure **out);

/**
 * String problem for `measure` with Robin coefficients `gamma0, gamma1`
 * (both zero for Neumann). The measure is copied.
 *
 * # Safety
 * `measure` must be a live handle and `out` valid for one handle.
 */
enum FssStatus fss_problem_new(const struct FssMeasure *measure,
                               double gamma0,
                               double gamma1,
                               struct FssProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from this library not yet freed.
 */
void fss_problem_free(struct FssProblem *problem);

/**
 * Number of eigenvalues.
 *
 * # Safety
 * `problem` must be a live handle or null (returns 0).
 */
size_t fss_problem_dimension(const struct FssProblem *problem);

/**
 * Number of eigenvalues strictly below `lambda`.
 *
 * # Safety
 * `problem` must be a live handle and `out` valid for one `size_t`.
 */
enum FssStatus fss_problem_count_below(const struct FssProblem *problem,
                                       double lambda,
                                       size_t *out);

/**
 * The `n`-th eigenvalue (from 0) to relative tolerance `rel_tol`.
 *
 * # Safety
 * `problem` must be a live handle and `out` valid for one double.
 */
enum FssStatus fss_problem_eigenvalue(const struct FssProblem *problem,
                                      size_t n,
                                      double rel_tol,
                                      double *out);

/**
 * The first `count` eigenvalues, written to `out`; `count` may not
 * exceed the dimension.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable for `count` doubles.
 */
enum FssStatus fss_problem_eigenvalues(const struct FssProblem *problem,
                                       size_t count,
                                       double rel_tol,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSS_H */
