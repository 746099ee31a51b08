#ifndef BARTFORGE_H
#define BARTFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_NULL_POINTER = 1,
  BF_STATUS_INVALID_ARGUMENT = 2,
  BF_STATUS_DEGENERATE_DATA = 3,
  BF_STATUS_MISSING_FORESTS = 4,
  BF_STATUS_IO = 5,
  BF_STATUS_FORMAT = 6,
  BF_STATUS_PANIC = 7,
} BfStatus;

// Fitted model: posterior draws and, optionally, the forests behind them.
typedef struct BfModel BfModel;

// Fit settings; start from `bf_fit_config_default`.
typedef struct BfFitConfig {
  uint32_t n_trees;
  uint32_t n_burn;
  uint32_t n_kept;
  uint32_t thinning;
  uint8_t max_depth;
  // Cutpoints per axis of a uniform grid; 0 selects the midpoint grid.
  uint8_t cutpoints;
  uint32_t n_chains;
  uint64_t seed;
  double k;
  double q;
  double nu;
  // Nonzero retains forests so `bf_predict` works on new data.
  uint8_t keep_forests;
} BfFitConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default settings: 200 trees, 1000 burn-in and 1000 kept draws, depth 6,
// 100 uniform cutpoints, 2 chains, k = 2, q = 0.9, nu = 3, forests kept.
struct BfFitConfig bf_fit_config_default(void);

// Fits a model to `n` rows of `p` predictors `x` and responses `y`.
//
// # Safety
// `x` must point to `n * p` doubles, `y` to `n` doubles, `config` to a
// valid config and `out` to writable storage for one handle.
enum BfStatus bf_fit(const double *x,
                     const double *y,
                     size_t n,
                     size_t p,
                     const struct BfFitConfig *config,
                     struct BfModel **out);

// Posterior mean and sd of the function at `n` new rows. Requires a model
// fitted with `keep_forests`.
//
// # Safety
// `model` must be a live handle, `x` must point to `n * p` doubles and
// `mean` and `sd` to `n` writable doubles each (`sd` may be null).
enum BfStatus bf_predict(const struct BfModel *model,
                         const double *x,
                         size_t n,
                         size_t p,
                         double *mean,
                         double *sd);

// Posterior mean of the function at the training rows.
//
// # Safety
// `model` must be a live handle and `mean` must point to
// `bf_model_n_train(model)` writable doubles.
enum BfStatus bf_train_mean(const struct BfModel *model, double *mean);

// Number of training rows, 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t bf_model_n_train(const struct BfModel *model);

// Total kept draws over all chains, 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t bf_model_n_draws(const struct BfModel *model);

// Writes the model as a trace container.
//
// # Safety
// `model` must be a live handle and `path` a NUL-terminated string.
enum BfStatus bf_model_save(const struct BfModel *model, const char *path);

// Reads a trace container into a new handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable storage for
// one handle.
enum BfStatus bf_model_load(const char *path, struct BfModel **out);

// Releases a handle; null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void bf_model_free(struct BfModel *model);

// Message of the calling thread's last error, or null. Valid until the
// next failing call on the same thread.
const char *bf_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BARTFORGE_H */
