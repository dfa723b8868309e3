#ifndef METRIC_LENS_H
#define METRIC_LENS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum MlStatus {
  ML_STATUS_OK = 0,
  ML_STATUS_NULL_POINTER = 1,
  ML_STATUS_INVALID_UTF8 = 2,
  ML_STATUS_INVALID_METRIC = 3,
  ML_STATUS_INVALID_GRAPH = 4,
  ML_STATUS_INDEX_OUT_OF_RANGE = 5,
  ML_STATUS_PARAMETER_OUT_OF_RANGE = 6,
  ML_STATUS_EMPTY_INTERSECTION = 7,
  ML_STATUS_INVALID_SPEC = 8,
  ML_STATUS_GEODESIC_CAP_EXCEEDED = 9,
  ML_STATUS_INVALID_INPUT = 10,
  ML_STATUS_PANIC = 11,
} MlStatus;

/**
 * Opaque handle to a validated finite metric space.
 */
typedef struct MlSpace MlSpace;

typedef struct MlHypWitness {
  size_t z;
  double nu;
  double target;
  double z_offset;
  double inner_excess;
  double outer_delta_needed;
  bool inner_ok;
  bool degenerate;
  bool swapped;
} MlHypWitness;

typedef struct MlLensReport {
  size_t intersection_size;
  size_t inner_center;
  double inner_radius;
  size_t outer_center;
  double outer_radius;
  /**
   * Outer radius over inner radius; `INFINITY` when only the inner radius is 0.
   */
  double lambda_mult;
  double gap_add;
  bool is_ball;
} MlLensReport;

typedef struct MlScanOptions {
  /**
   * 0 scans every ball pair.
   */
  size_t pair_budget;
  uint64_t seed;
  bool restrict_far;
  bool witnesses;
} MlScanOptions;

typedef struct MlScanSummary {
  uint64_t pairs_considered;
  uint64_t pairs_filtered;
  uint64_t pairs_empty;
  uint64_t pairs_scanned;
  uint64_t exact_balls;
  double sup_lambda_mult;
  double sup_gap_add;
  double quantization_allowance;
  /**
   * Only meaningful when witnesses were requested.
   */
  uint64_t witness_inner_failures;
  double witness_max_outer_delta;
  bool exhaustive;
} MlScanSummary;

typedef struct MlBoundCheck {
  double diam;
  double bound;
  double allowance;
  bool pass;
} MlBoundCheck;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ml_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ml_last_error_message(void);

/**
 * Builds a space from a row-major `n × n` distance matrix.
 *
 * # Safety
 * `data` must point to `n * n` readable doubles; `out` must be writable.
 */
enum MlStatus ml_space_from_matrix(const double *data,
                                   size_t n,
                                   double tol_metric,
                                   struct MlSpace **out);

/**
 * Shortest-path metric of an undirected weighted graph with `m` edges
 * `(us[k], vs[k], weights[k])`.
 *
 * # Safety
 * `us`, `vs` and `weights` must point to `m` readable entries each; `out` must be writable.
 */
enum MlStatus ml_space_from_edges(size_t vertex_count,
                                  const size_t *us,
                                  const size_t *vs,
                                  const double *weights,
                                  size_t m,
                                  struct MlSpace **out);

/**
 * Builds a space from a JSON generator spec such as
 * `{"kind": "random_tree", "n": 50, "seed": 7}`.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_space_generate(const char *spec_json, struct MlSpace **out);

/**
 * Releases a space. NULL is ignored.
 *
 * # Safety
 * `space` must come from an `ml_space_*` constructor and not be used afterwards.
 */
void ml_space_free(struct MlSpace *space);

/**
 * Number of points, or 0 for NULL.
 *
 * # Safety
 * `space` must be NULL or a live handle.
 */
size_t ml_space_len(const struct MlSpace *space);

/**
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_space_distance(const struct MlSpace *space, size_t i, size_t j, double *out);

/**
 * The edge-length quantum used as the discrete pass/fail allowance.
 *
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_space_quantum(const struct MlSpace *space, double *out);

/**
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_geodesicity_defect(const struct MlSpace *space, double *out);

/**
 * Tripod lengths `(a₁, a₂, a₃)` of a triangle.
 *
 * # Safety
 * `space` must be a live handle; `out` must point to 3 writable doubles.
 */
enum MlStatus ml_tripod_lengths(const struct MlSpace *space,
                                size_t x1,
                                size_t x2,
                                size_t x3,
                                double *out);

/**
 * Four-point δ over all quadruples, or `budget` sampled ones when there are more.
 *
 * # Safety
 * `space` must be a live handle; `delta` and `exact` must be writable.
 */
enum MlStatus ml_four_point_delta(const struct MlSpace *space,
                                  size_t budget,
                                  uint64_t seed,
                                  double *delta,
                                  bool *exact);

/**
 * Thin-triangle δ. `exhaustive_cap = 0` uses canonical geodesics; otherwise
 * every geodesic choice up to that many per vertex pair.
 *
 * # Safety
 * `space` must be a live handle; `delta` and `exact` must be writable.
 */
enum MlStatus ml_space_thinness(const struct MlSpace *space,
                                size_t budget,
                                uint64_t seed,
                                size_t exhaustive_cap,
                                double *delta,
                                bool *exact);

/**
 * # Safety
 * `space` must be a live handle; `is_tree` and `delta4` must be writable.
 */
enum MlStatus ml_certify_tree(const struct MlSpace *space,
                              double tol,
                              bool *is_tree,
                              double *delta4);

/**
 * Constructive witness for `B(x, r) ∩ B(y, s)`.
 *
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_hyp_witness(const struct MlSpace *space,
                             size_t x,
                             double r,
                             size_t y,
                             double s,
                             struct MlHypWitness *out);

/**
 * Best inner and outer balls of `B(x, r) ∩ B(y, s)`.
 *
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_lens_report(const struct MlSpace *space,
                             size_t x,
                             double r,
                             size_t y,
                             double s,
                             struct MlLensReport *out);

/**
 * Distortion scan over ball pairs at every realized radius. `options` may be
 * NULL for an exhaustive scan with the far-pair restriction.
 *
 * # Safety
 * `space` must be a live handle; `options` NULL or readable; `out` writable.
 */
enum MlStatus ml_diamond_scan(const struct MlSpace *space,
                              const struct MlScanOptions *options,
                              struct MlScanSummary *out);

/**
 * `diam(B(x, t·d + h) ∩ B(y, (1-t)·d + h)) <= 4λh` within one quantum.
 *
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_lens_diameter_check(const struct MlSpace *space,
                                     size_t x,
                                     size_t y,
                                     double t,
                                     double h,
                                     double lambda,
                                     struct MlBoundCheck *out);

/**
 * Closed-form and sampled diameter of the planar lens with parameters `(r1, h)`.
 *
 * # Safety
 * `closed_form` and `sampled` must be writable.
 */
enum MlStatus ml_euclidean_lens_diameter(double r1,
                                         double h,
                                         size_t samples,
                                         uint64_t seed,
                                         double *closed_form,
                                         double *sampled);

/**
 * Checks that `values` (one per point) is `lip`-Lipschitz on the space.
 *
 * # Safety
 * `space` must be a live handle; `values` must point to `ml_space_len(space)` doubles.
 */
enum MlStatus ml_check_lipschitz(const struct MlSpace *space, const double *values, double lip);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* METRIC_LENS_H */
