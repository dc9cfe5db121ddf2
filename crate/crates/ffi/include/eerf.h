#ifndef EERF_H
#define EERF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

#define EERF_TASK_REGRESSION 0

#define EERF_TASK_CLASSIFICATION 1

#define EERF_FORMAT_CSV 0

#define EERF_FORMAT_LIBSVM 1

#define EERF_SAMPLER_GAUSSIAN 0

#define EERF_SAMPLER_LAPLACE 1

#define EERF_SAMPLER_CAUCHY 2

typedef enum EerfStatus {
  EERF_STATUS_OK = 0,
  EERF_STATUS_NULL_POINTER = 1,
  EERF_STATUS_INVALID_ARGUMENT = 2,
  EERF_STATUS_DOMAIN = 3,
  EERF_STATUS_PARSE = 4,
  EERF_STATUS_DIMENSION_MISMATCH = 5,
  EERF_STATUS_CONVERGENCE = 6,
  EERF_STATUS_IO = 7,
  EERF_STATUS_PANIC = 8,
} EerfStatus;

// A dataset (inputs, responses and task).
typedef struct EerfDataset EerfDataset;

// An ordered list of random features.
typedef struct EerfFeatures EerfFeatures;

// A fitted linear model over a feature list.
typedef struct EerfModel EerfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next call into this library on the same thread.
const char *eerf_last_error(void);

// Library version as a static NUL-terminated string.
const char *eerf_version(void);

// Builds a dataset from a row-major `n_rows × n_cols` matrix and `n_rows`
// responses.
enum EerfStatus eerf_dataset_new(const double *x,
                                 size_t n_rows,
                                 size_t n_cols,
                                 const double *y,
                                 int32_t task,
                                 struct EerfDataset **out);

// Reads a CSV or libsvm file. `n_features = 0` infers the libsvm width.
enum EerfStatus eerf_dataset_load(const char *path,
                                  int32_t format,
                                  int32_t task,
                                  size_t n_features,
                                  struct EerfDataset **out);

void eerf_dataset_free(struct EerfDataset *ds);

enum EerfStatus eerf_dataset_shape(const struct EerfDataset *ds, size_t *n_rows, size_t *n_cols);

// Copies the (row-major) inputs into `x` (length `n_rows · n_cols`) and
// the responses into `y` (length `n_rows`). Either buffer may be NULL.
enum EerfStatus eerf_dataset_copy(const struct EerfDataset *ds, double *x, double *y);

// Standardizes `train` and applies the same transform to `test` (which may
// be NULL, in which case `test_out` is left untouched).
enum EerfStatus eerf_dataset_standardize(const struct EerfDataset *train,
                                         const struct EerfDataset *test,
                                         struct EerfDataset **train_out,
                                         struct EerfDataset **test_out);

// Mean distance to the `k`-th nearest neighbour over a seeded probe of
// `probe_size` rows.
enum EerfStatus eerf_bandwidth_heuristic(const struct EerfDataset *ds,
                                         size_t k,
                                         size_t probe_size,
                                         uint64_t seed,
                                         double *sigma);

// `m0` cosine features for inputs of width `dim`.
enum EerfStatus eerf_features_sample_cosine(int32_t sampler,
                                            double bandwidth,
                                            size_t dim,
                                            size_t m0,
                                            uint64_t seed,
                                            struct EerfFeatures **out);

enum EerfStatus eerf_features_sample_arccosine(uint32_t order,
                                               size_t dim,
                                               size_t m0,
                                               uint64_t seed,
                                               struct EerfFeatures **out);

enum EerfStatus eerf_features_sample_linear(size_t dim,
                                            size_t m0,
                                            uint64_t seed,
                                            struct EerfFeatures **out);

void eerf_features_free(struct EerfFeatures *fs);

enum EerfStatus eerf_features_len(const struct EerfFeatures *fs, size_t *len);

// Writes the 1-based sampling positions of the features into `out`
// (length `eerf_features_len`).
enum EerfStatus eerf_features_source_indices(const struct EerfFeatures *fs,
                                             size_t *out,
                                             size_t len);

// Empirical scores `(1/N) Σ yⁿ φ(xⁿ, ω)`, one per feature, into `scores`
// (length `len`, equal to the feature count). With `center` non-zero the
// mean response is subtracted first.
enum EerfStatus eerf_features_score(const struct EerfFeatures *fs,
                                    const struct EerfDataset *ds,
                                    int32_t center,
                                    double *scores,
                                    size_t len);

// The `m` features with the largest `|score|` on `ds`, in descending order.
enum EerfStatus eerf_features_select_eerf(const struct EerfFeatures *fs,
                                          const struct EerfDataset *ds,
                                          size_t m,
                                          int32_t center,
                                          struct EerfFeatures **out);

// The first `m` features.
enum EerfStatus eerf_features_select_rks(const struct EerfFeatures *fs,
                                         size_t m,
                                         struct EerfFeatures **out);

// Fits a model with fixed regularization (squared loss for regression,
// logistic for classification).
enum EerfStatus eerf_model_fit(const struct EerfDataset *ds,
                               const struct EerfFeatures *fs,
                               double lambda_reg,
                               struct EerfModel **out);

// Picks λ from `grid` (or the default `{1e-5, …, 1e5}` when `grid` is NULL)
// by error on `val`, returning the model fitted on `train`.
enum EerfStatus eerf_model_tune(const struct EerfDataset *train,
                                const struct EerfDataset *val,
                                const struct EerfFeatures *fs,
                                const double *grid,
                                size_t grid_len,
                                double *lambda_out,
                                struct EerfModel **out);

void eerf_model_free(struct EerfModel *model);

// Number of weights (selected features) in the model.
enum EerfStatus eerf_model_len(const struct EerfModel *model, size_t *len);

// Predictions for a row-major `n_rows × n_cols` matrix into `out`
// (length `n_rows`): raw scores for regression, ±1 for classification.
enum EerfStatus eerf_model_predict(const struct EerfModel *model,
                                   const double *x,
                                   size_t n_rows,
                                   size_t n_cols,
                                   double *out);

// Error percentage of `pred` against `y`: misclassification rate for
// classification, RMSE for regression, both times 100.
enum EerfStatus eerf_evaluate(const double *pred,
                              const double *y,
                              size_t n,
                              int32_t task,
                              double *error_pct);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EERF_H */
