#ifndef CBTR_H
#define CBTR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum CbtrStatus {
  CBTR_STATUS_OK = 0,
  CBTR_STATUS_NULL_POINTER = 1,
  CBTR_STATUS_INVALID_UTF8 = 2,
  CBTR_STATUS_IO = 3,
  CBTR_STATUS_PARSE = 4,
  CBTR_STATUS_INVALID_CONFIG = 5,
  CBTR_STATUS_EMPTY_DATASET = 6,
  CBTR_STATUS_MISSING_LABELS = 7,
  CBTR_STATUS_OUT_OF_RANGE = 8,
  CBTR_STATUS_BUFFER_TOO_SMALL = 9,
  CBTR_STATUS_SYNTH = 10,
  CBTR_STATUS_INTERNAL = 11,
} CbtrStatus;

/**
 * Loaded, time-sorted point set.
 */
typedef struct CbtrDataset CbtrDataset;

/**
 * Output of one reconstruction run.
 */
typedef struct CbtrRun CbtrRun;

/**
 * Reconstruction constants; see `cbtr_config_default`.
 */
typedef struct CbtrConfigC {
  int64_t window_s;
  double moving_speed_sum;
  double time_weight_moving;
  double time_weight_steady;
  double angle_time_weight;
  double cos_moving_min;
  double cos_steady_min;
  size_t n_abnormal;
  double turn_rescue_dist_m;
  double turn_rescue_cos_min;
} CbtrConfigC;

/**
 * Scores of a run against the dataset's vessel ids.
 */
typedef struct CbtrEval {
  double correct_neighbor_rate;
  size_t jumps;
  size_t merges;
  size_t n_clusters_predicted;
  size_t n_vessels_true;
  size_t n_vessels_estimated;
} CbtrEval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *cbtr_last_error(void);

/**
 * Writes the default reconstruction constants to `out`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `CbtrConfigC`.
 */
enum CbtrStatus cbtr_config_default(struct CbtrConfigC *out);

/**
 * Parses a CSV file. With `require_labels` the `vid` column is mandatory.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * writable.
 */
enum CbtrStatus cbtr_dataset_from_csv_path(const char *path,
                                           bool require_labels,
                                           struct CbtrDataset **out);

/**
 * Parses CSV text held in memory.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be null or writable.
 */
enum CbtrStatus cbtr_dataset_from_csv_buffer(const uint8_t *data,
                                             size_t len,
                                             bool require_labels,
                                             struct CbtrDataset **out);

/**
 * Generates the 20-vessel reference fleet for `seed`, with vessel ids.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum CbtrStatus cbtr_dataset_synth_s1(uint64_t seed, struct CbtrDataset **out);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t cbtr_dataset_len(const struct CbtrDataset *ds);

/**
 * Latitude scaling factor of the dataset, or NaN for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
double cbtr_dataset_alpha(const struct CbtrDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void cbtr_dataset_free(struct CbtrDataset *ds);

/**
 * Reconstructs trajectories. A null `config` uses the defaults; `threads`
 * of 0 uses every core.
 *
 * # Safety
 * `ds` must be a live dataset handle, `config` null or readable, `out`
 * null or writable.
 */
enum CbtrStatus cbtr_run(const struct CbtrDataset *ds,
                         const struct CbtrConfigC *config,
                         size_t threads,
                         struct CbtrRun **out);

/**
 * Number of clusters, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
size_t cbtr_run_n_clusters(const struct CbtrRun *run);

/**
 * Copies the cluster id of every point into `buf`, which must hold at
 * least as many entries as the dataset has points.
 *
 * # Safety
 * `run` must be a live run handle and `buf` must point to `len` writable
 * `size_t` slots.
 */
enum CbtrStatus cbtr_run_cluster_ids(const struct CbtrRun *run, size_t *buf, size_t len);

/**
 * Writes the best next point of point `i` to `out`, or -1 when it has none.
 *
 * # Safety
 * `run` must be a live run handle, `out` null or writable.
 */
enum CbtrStatus cbtr_run_link_target(const struct CbtrRun *run, size_t i, int64_t *out);

/**
 * Writes whether point `i` ends a trajectory.
 *
 * # Safety
 * `run` must be a live run handle, `out` null or writable.
 */
enum CbtrStatus cbtr_run_is_endpoint(const struct CbtrRun *run, size_t i, bool *out);

/**
 * Scores `run` against the vessel ids of `ds`, the dataset it was
 * computed from.
 *
 * # Safety
 * `run` and `ds` must be live handles, `out` null or writable.
 */
enum CbtrStatus cbtr_run_evaluate(const struct CbtrRun *run,
                                  const struct CbtrDataset *ds,
                                  struct CbtrEval *out);

/**
 * # Safety
 * `run` must be null or a handle not yet freed.
 */
void cbtr_run_free(struct CbtrRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBTR_H */
