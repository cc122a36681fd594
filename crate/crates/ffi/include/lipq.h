#ifndef LIPQ_H
#define LIPQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Arrivals embedded as pure steps at integer epochs.
#define LIPQ_EMBEDDING_STEP 0

// Arrivals as jumps at integer epochs with linear service in between.
#define LIPQ_EMBEDDING_DRIFT 1

// Result code of every fallible call.
typedef enum LipqStatus {
  LIPQ_STATUS_OK = 0,
  LIPQ_STATUS_DOMAIN = 1,
  LIPQ_STATUS_INVALID_PARAMETER = 2,
  LIPQ_STATUS_INSUFFICIENT_DATA = 3,
  LIPQ_STATUS_NULL_POINTER = 4,
  LIPQ_STATUS_IO = 5,
  LIPQ_STATUS_PARSE = 6,
  LIPQ_STATUS_PANIC = 7,
} LipqStatus;

// Per-replication results of a Monte Carlo experiment.
typedef struct LipqDataset LipqDataset;

// Queue and threshold parameters.
typedef struct LipqModel LipqModel;

// One reflected queue path together with its intensity level.
typedef struct LipqQueuePath LipqQueuePath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null if none. The string
// stays valid until the next failing call on the same thread.
const char *lipq_last_error(void);

// Validate parameters and create a model.
//
// # Safety
// `out` must be valid for writes.
enum LipqStatus lipq_model_new(double alpha,
                               double mean,
                               double rate,
                               double theta,
                               double buffer,
                               double horizon,
                               struct LipqModel **out);

// Model with the desk parameters.
//
// # Safety
// `out` must be valid for writes.
enum LipqStatus lipq_model_desk(struct LipqModel **out);

// # Safety
// `model` is null or a handle from `lipq_model_new`/`lipq_model_desk` not yet freed.
void lipq_model_free(struct LipqModel *model);

// `kappa = (1 - theta) K / (c - m)`.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_model_kappa(const struct LipqModel *model, double *out);

// Asymptotic tail constant of the arrival law.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_tail_constant(const struct LipqModel *model, double *out);

// Arrival survival function `P(A > z)`.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_survival(const struct LipqModel *model, double z, double *out);

// Arrival by inverse transform of `u` in `(0, 1)`.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_sample_arrival(const struct LipqModel *model, double u, double *out);

// First-level tail `mu1((l, inf))`, `l > 0`.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_mu1_tail(const struct LipqModel *model, double l, double *out);

// Second-level tail `mu2((l, inf))`, `l > kappa`.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_mu2_tail(const struct LipqModel *model, double l, double *out);

// Combined estimate of `P(L > l)` for tail constant `c`.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_combined_tail(const struct LipqModel *model, double c, double l, double *out);

// One step of the buffered Lindley recursion.
//
// # Safety
// `out` is valid for writes.
enum LipqStatus lipq_lindley_step(double q_prev, double a, double c, double buffer, double *out);

// Simulate one queue path with `M` arrivals.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_simulate(const struct LipqModel *model,
                              uint32_t embedding_code,
                              uint64_t seed,
                              struct LipqQueuePath **out);

// # Safety
// `path` is null or a handle from `lipq_simulate` not yet freed.
void lipq_path_free(struct LipqQueuePath *path);

// Length of the longest interval on which the queue exceeds `theta K`.
//
// # Safety
// `path` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_path_longest_intense(const struct LipqQueuePath *path, double *out);

// Work lost at the upper boundary.
//
// # Safety
// `path` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_path_lost_work(const struct LipqQueuePath *path, double *out);

// Queue content at time `t` in `[0, M]`.
//
// # Safety
// `path` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_path_value_at(const struct LipqQueuePath *path, double t, double *out);

// Run `reps` replications with default experiment settings.
//
// # Safety
// `model` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_experiment_run(const struct LipqModel *model,
                                    size_t reps,
                                    uint64_t seed,
                                    struct LipqDataset **out);

// # Safety
// `dataset` is null or a handle from `lipq_experiment_run` not yet freed.
void lipq_dataset_free(struct LipqDataset *dataset);

// Number of replications with `L > 0`.
//
// # Safety
// `dataset` is a live handle; `out` is valid for writes.
enum LipqStatus lipq_dataset_n_positive(const struct LipqDataset *dataset, size_t *out);

// Estimate of `P(L > l)` and its binomial standard error.
//
// # Safety
// `dataset` is a live handle; `value` and `se` are valid for writes.
enum LipqStatus lipq_dataset_tail(const struct LipqDataset *dataset,
                                  double l,
                                  double *value,
                                  double *se);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LIPQ_H */
