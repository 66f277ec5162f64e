#ifndef SEGFLOW_H
#define SEGFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SegflowStatus {
  SEGFLOW_STATUS_OK = 0,
  SEGFLOW_STATUS_NULL_POINTER = 1,
  SEGFLOW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Zero variance, zero mass or too few usable entries.
   */
  SEGFLOW_STATUS_DEGENERATE = 3,
  /**
   * Singular or ill-conditioned linear algebra.
   */
  SEGFLOW_STATUS_NUMERICAL = 4,
  SEGFLOW_STATUS_IO = 5,
  SEGFLOW_STATUS_PARSE = 6,
  SEGFLOW_STATUS_PANIC = 7,
} SegflowStatus;

typedef enum SegflowChannel {
  SEGFLOW_CHANNEL_PURCHASE = 0,
  SEGFLOW_CHANNEL_MENTION = 1,
} SegflowChannel;

/**
 * Opaque group-level mixing matrix.
 */
typedef struct SegflowMixing SegflowMixing;

/**
 * Opaque interaction network.
 */
typedef struct SegflowNetwork SegflowNetwork;

/**
 * Fitted or planted gravity constants.
 */
typedef struct SegflowGravityParams {
  double c;
  double beta1;
  double beta2;
  double epsilon;
  double alpha;
  /**
   * Output only.
   */
  double r2_weighted;
} SegflowGravityParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length of the last error message on this thread, 0 if none.
 */
size_t segflow_last_error_length(void);

/**
 * Copies the last error message, NUL-terminated and truncated to
 * `capacity`. Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `capacity` writable bytes.
 */
size_t segflow_last_error_message(char *buf, size_t capacity);

/**
 * Library version as a static NUL-terminated string.
 */
const char *segflow_version(void);

/**
 * Shannon entropy (nats) of non-negative counts.
 *
 * # Safety
 * `counts` must point to `n` doubles; `out` must be writable.
 */
enum SegflowStatus segflow_entropy(const double *counts, size_t n, double *out);

/**
 * GINI coefficient of non-negative values.
 *
 * # Safety
 * `values` must point to `n` doubles; `out` must be writable.
 */
enum SegflowStatus segflow_gini(const double *values, size_t n, double *out);

/**
 * Pearson correlation; `weights` may be null.
 *
 * # Safety
 * `x`, `y` and a non-null `weights` must point to `n` doubles.
 */
enum SegflowStatus segflow_pearson(const double *x,
                                   const double *y,
                                   const double *weights,
                                   size_t n,
                                   double *out);

/**
 * Equal-size SES groups: writes labels 1..=k for each of the `n` scores.
 *
 * # Safety
 * `scores` must point to `n` doubles and `labels_out` to `n` writable
 * `size_t`s.
 */
enum SegflowStatus segflow_assign_groups(const double *scores,
                                         size_t n,
                                         size_t k,
                                         bool ses_ascending,
                                         size_t *labels_out);

/**
 * Raw network from an `n*n` weight matrix with per-node population and
 * sampled-user counts.
 *
 * # Safety
 * `weights` must point to `n*n` doubles, `population` and `users` to `n`
 * doubles; `out` must be writable.
 */
enum SegflowStatus segflow_network_new(size_t n,
                                       const double *weights,
                                       const double *population,
                                       const double *users,
                                       enum SegflowChannel channel,
                                       struct SegflowNetwork **out);

/**
 * # Safety
 * `net` must come from this library and not be used afterwards.
 */
void segflow_network_free(struct SegflowNetwork *net);

/**
 * Population-weighted copy of a raw network.
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum SegflowStatus segflow_network_population_weight(const struct SegflowNetwork *net,
                                                     struct SegflowNetwork **out);

/**
 * Copies the `n*n` weights into `buf`.
 *
 * # Safety
 * `net` must be a live handle and `buf` must hold `capacity` doubles.
 */
enum SegflowStatus segflow_network_weights(const struct SegflowNetwork *net,
                                           double *buf,
                                           size_t capacity);

/**
 * Node count of a network handle, 0 for null.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t segflow_network_len(const struct SegflowNetwork *net);

/**
 * Group-level mixing of a network under 1-based `labels`. Raw networks are
 * rejected unless `allow_raw` is set.
 *
 * # Safety
 * `net` must be a live handle, `labels` must point to one label per node.
 */
enum SegflowStatus segflow_mixing_new(const struct SegflowNetwork *net,
                                      const size_t *labels,
                                      size_t k,
                                      bool allow_raw,
                                      struct SegflowMixing **out);

/**
 * Mixing matrix from a `k*k` grid of group masses, labels 1..=k.
 *
 * # Safety
 * `mass` must point to `k*k` doubles; `out` must be writable.
 */
enum SegflowStatus segflow_mixing_from_grid(size_t k,
                                            const double *mass,
                                            struct SegflowMixing **out);

/**
 * # Safety
 * `mix` must come from this library and not be used afterwards.
 */
void segflow_mixing_free(struct SegflowMixing *mix);

/**
 * # Safety
 * `mix` must be a live handle; `out` must be writable.
 */
enum SegflowStatus segflow_mixing_assortativity(const struct SegflowMixing *mix, double *out);

/**
 * Upper minus lower triangle of the normalized mixing matrix.
 *
 * # Safety
 * `mix` must be a live handle; `out` must be writable.
 */
enum SegflowStatus segflow_mixing_asymmetry_bias(const struct SegflowMixing *mix, double *out);

/**
 * Copies the globally normalized `k*k` matrix into `buf`.
 *
 * # Safety
 * `mix` must be a live handle and `buf` must hold `capacity` doubles.
 */
enum SegflowStatus segflow_mixing_normalized(const struct SegflowMixing *mix,
                                             double *buf,
                                             size_t capacity);

/**
 * Weighted least-squares gravity fit on a raw network with default options.
 *
 * # Safety
 * `net` must be a live handle; `dist_km` must point to `n*n` doubles and
 * `origin`, `dest` to `n` doubles each; `out` must be writable.
 */
enum SegflowStatus segflow_fit_gravity(const struct SegflowNetwork *net,
                                       const double *dist_km,
                                       const double *origin,
                                       const double *dest,
                                       struct SegflowGravityParams *out);

/**
 * Writes model flows `c·o_i^β1·d_j^β2/(T_ij+ε)^α` into `weights_out`.
 *
 * # Safety
 * `params` must be readable; `dist_km` and `weights_out` must hold `n*n`
 * doubles, `origin` and `dest` `n` doubles each.
 */
enum SegflowStatus segflow_simulate_gravity(const struct SegflowGravityParams *params,
                                            size_t n,
                                            const double *dist_km,
                                            const double *origin,
                                            const double *dest,
                                            double *weights_out);

/**
 * Generates a preset synthetic city into directory `dir`.
 *
 * # Safety
 * `preset` and `dir` must be NUL-terminated strings.
 */
enum SegflowStatus segflow_synth_write(const char *preset, uint64_t seed, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEGFLOW_H */
