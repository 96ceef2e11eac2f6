#ifndef NOODL_H
#define NOODL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NoodlStatus {
  NOODL_STATUS_OK = 0,
  NOODL_STATUS_NULL_POINTER = 1,
  NOODL_STATUS_INVALID_ARGUMENT = 2,
  NOODL_STATUS_CONFIG = 3,
  NOODL_STATUS_SHAPE = 4,
  NOODL_STATUS_DEGENERATE = 5,
  NOODL_STATUS_IO = 6,
  NOODL_STATUS_PANIC = 7,
  NOODL_STATUS_INTERNAL = 8,
} NoodlStatus;

typedef enum NoodlAlgorithm {
  NOODL_ALGORITHM_NOODL = 0,
  NOODL_ALGORITHM_BIASED_HT = 1,
} NoodlAlgorithm;

typedef enum NoodlTermination {
  NOODL_TERMINATION_MAX_ITERS = 0,
  NOODL_TERMINATION_DICT_TOL = 1,
  NOODL_TERMINATION_FIT_TOL = 2,
  NOODL_TERMINATION_DEGENERATE = 3,
  NOODL_TERMINATION_DATA_EXHAUSTED = 4,
} NoodlTermination;

// Opaque dictionary handle.
typedef struct NoodlDictionary NoodlDictionary;

// Opaque handle to a finished run.
typedef struct NoodlRun NoodlRun;

// One trace row. Metrics that need ground truth are NaN when unavailable.
typedef struct NoodlTraceRow {
  size_t t;
  double max_col_err;
  double rel_frob_a;
  double rel_frob_x;
  double fit;
  double support_acc;
  double wall_ms;
} NoodlTraceRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or NULL.
// The pointer stays valid until the next `noodl_*` call on the same thread.
const char *noodl_last_error(void);

// Library version as a static NUL-terminated string.
const char *noodl_version(void);

// Draws an `n x m` dictionary with i.i.d. Gaussian, unit-normalized columns.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum NoodlStatus noodl_dictionary_generate(size_t n,
                                           size_t m,
                                           uint64_t seed,
                                           struct NoodlDictionary **out);

// Rotates every atom of `truth` to column distance exactly `epsilon0`.
//
// # Safety
// `truth` must be a live handle and `out` a valid output pointer.
enum NoodlStatus noodl_dictionary_perturb(const struct NoodlDictionary *truth,
                                          double epsilon0,
                                          uint64_t seed,
                                          struct NoodlDictionary **out);

// Builds a dictionary from `n * m` column-major values. With `normalize`
// the columns are scaled to unit norm, otherwise they must already be.
//
// # Safety
// `data` must point to `n * m` readable doubles and `out` be a valid output pointer.
enum NoodlStatus noodl_dictionary_from_data(const double *data,
                                            size_t n,
                                            size_t m,
                                            bool normalize,
                                            struct NoodlDictionary **out);

// # Safety
// `dict` must be a live handle; `n` and `m` may be NULL.
enum NoodlStatus noodl_dictionary_dims(const struct NoodlDictionary *dict, size_t *n, size_t *m);

// Copies the atoms into `buf` in column-major order. `len` must be at least `n * m`.
//
// # Safety
// `dict` must be a live handle and `buf` point to `len` writable doubles.
enum NoodlStatus noodl_dictionary_copy_data(const struct NoodlDictionary *dict,
                                            double *buf,
                                            size_t len);

// Mutual incoherence `sqrt(n) * max_{i != j} |<A_i, A_j>|`.
//
// # Safety
// `dict` must be a live handle and `out` a valid pointer.
enum NoodlStatus noodl_dictionary_incoherence(const struct NoodlDictionary *dict, double *out);

// # Safety
// `dict` must be NULL or a handle not yet freed.
void noodl_dictionary_free(struct NoodlDictionary *dict);

// Runs `algorithm` on synthetic data drawn from `truth`. `config_json` is a
// JSON object with `model` and `solver` entries (an experiment config
// written by `noodl gen-config` is accepted as is). A run that stops on a
// collapsed atom still succeeds; check [`noodl_run_termination`].
//
// # Safety
// `truth` must be a live handle, `config_json` a NUL-terminated string and
// `out` a valid output pointer.
enum NoodlStatus noodl_run(const struct NoodlDictionary *truth,
                           const char *config_json,
                           enum NoodlAlgorithm algorithm,
                           struct NoodlRun **out);

// Number of recorded iterations; 0 for a NULL handle.
//
// # Safety
// `run` must be NULL or a live handle.
size_t noodl_run_trace_len(const struct NoodlRun *run);

// # Safety
// `run` must be a live handle and `row` a valid pointer.
enum NoodlStatus noodl_run_trace_row(const struct NoodlRun *run,
                                     size_t index,
                                     struct NoodlTraceRow *row);

// # Safety
// `run` must be a live handle and `out` a valid pointer.
enum NoodlStatus noodl_run_termination(const struct NoodlRun *run, enum NoodlTermination *out);

// Copies the final dictionary into a new handle owned by the caller.
//
// # Safety
// `run` must be a live handle and `out` a valid output pointer.
enum NoodlStatus noodl_run_dictionary(const struct NoodlRun *run, struct NoodlDictionary **out);

// # Safety
// `run` must be NULL or a handle not yet freed.
void noodl_run_free(struct NoodlRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOODL_H */
