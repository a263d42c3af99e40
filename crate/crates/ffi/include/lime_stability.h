#ifndef LIME_STABILITY_H
#define LIME_STABILITY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result of every fallible call. Values 2 to 6 match the `limestab`
 process exit codes.
 */
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  LS_STATUS_NULL_ARGUMENT = 1,
  LS_STATUS_CONFIG = 2,
  LS_STATUS_DATA = 3,
  LS_STATUS_PREDICTOR = 4,
  LS_STATUS_NUMERIC = 5,
  LS_STATUS_IO = 6,
  /*
   A string argument was not valid UTF-8.
   */
  LS_STATUS_INVALID_UTF8 = 7,
  /*
   An index argument was out of range.
   */
  LS_STATUS_OUT_OF_RANGE = 8,
  /*
   Rust code panicked; the library state is unchanged but the call did
   nothing.
   */
  LS_STATUS_PANIC = 9,
} LsStatus;

typedef struct LsExplanation LsExplanation;

typedef struct LsPredictor LsPredictor;

typedef struct LsReport LsReport;

/*
 Per-feature sampling means and standard deviations.
 */
typedef struct LsStats LsStats;

/*
 Tunables of an explanation. Obtain defaults from [`ls_config_default`].
 */
typedef struct LsConfig {
  uintptr_t num_samples;
  uintptr_t num_features;
  double kernel_width;
  double ridge_penalty;
  uintptr_t repeats;
  uint64_t master_seed;
  bool include_query_point;
  bool unweighted_selection;
} LsConfig;

/*
 Scores `rows` points stored row-major in `points` (`rows * cols`
 doubles), writing `rows` values to `out`. Returns 0 on success.
 */
typedef int (*LsPredictFn)(void *user_data,
                           const double *points,
                           uintptr_t rows,
                           uintptr_t cols,
                           double *out);

/*
 One selected feature of an explanation.
 */
typedef struct LsContribution {
  uintptr_t feature_index;
  double coefficient;
  double raw_coefficient;
  double variance;
  double ci_lower;
  double ci_upper;
  double contribution;
} LsContribution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *ls_last_error_message(void);

/*
 Library version as a static nul-terminated string.
 */
const char *ls_version(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from an `ls_*` function and not have been freed.
 */
void ls_string_free(char *s);

/*
 Default settings for a model over `dims` features.
 */
struct LsConfig ls_config_default(uintptr_t dims);

/*
 Builds statistics from `dims` means and standard deviations.

 # Safety
 `means` and `stds` must point to `dims` readable doubles; `out` must be
 writable.
 */
enum LsStatus ls_stats_new(const double *means,
                           const double *stds,
                           uintptr_t dims,
                           struct LsStats **out);

/*
 Infers statistics from a CSV file. `target_column` may be null.

 # Safety
 String arguments must be nul-terminated; `out` must be writable.
 */
enum LsStatus ls_stats_from_csv(const char *path, const char *target_column, struct LsStats **out);

/*
 # Safety
 `stats` must be null or a live handle.
 */
uintptr_t ls_stats_dims(const struct LsStats *stats);

/*
 # Safety
 `stats` must be null or a handle not yet freed.
 */
void ls_stats_free(struct LsStats *stats);

/*
 Creates a predictor from a descriptor: `builtin:<spec>` or
 `cmd:<program and arguments>`. `dims` is the feature count announced to
 external processes.

 # Safety
 `descriptor` must be nul-terminated; `out` must be writable.
 */
enum LsStatus ls_predictor_new(const char *descriptor, uintptr_t dims, struct LsPredictor **out);

/*
 Wraps a C scoring function over `dims` features. The callback is never
 invoked concurrently, but may be invoked from threads other than the
 caller's.

 # Safety
 `user_data` must stay valid while the predictor lives; `out` must be
 writable.
 */
enum LsStatus ls_predictor_from_callback(LsPredictFn func,
                                         void *user_data,
                                         uintptr_t dims,
                                         struct LsPredictor **out);

/*
 # Safety
 `predictor` must be null or a handle not yet freed.
 */
void ls_predictor_free(struct LsPredictor *predictor);

/*
 Explains `point` (length = the stats' feature count) with one LIME run on
 the perturbation batch drawn from `seed`.

 # Safety
 All pointers must be valid; `point` must hold `ls_stats_dims(stats)`
 doubles.
 */
enum LsStatus ls_explain(const struct LsPredictor *predictor,
                         const struct LsStats *stats,
                         const double *point,
                         const struct LsConfig *config,
                         uint64_t seed,
                         struct LsExplanation **out);

/*
 # Safety
 `e` must be a live handle.
 */
double ls_explanation_intercept(const struct LsExplanation *e);

/*
 Surrogate prediction at the query point.

 # Safety
 `e` must be a live handle.
 */
double ls_explanation_lime_prediction(const struct LsExplanation *e);

/*
 # Safety
 `e` must be a live handle.
 */
uintptr_t ls_explanation_len(const struct LsExplanation *e);

/*
 Contribution `k`, in decreasing order of magnitude.

 # Safety
 `e` must be a live handle and `out` writable.
 */
enum LsStatus ls_explanation_get(const struct LsExplanation *e,
                                 uintptr_t k,
                                 struct LsContribution *out);

/*
 The explanation as JSON; free with [`ls_string_free`]. Null on failure.

 # Safety
 `e` must be a live handle.
 */
char *ls_explanation_to_json(const struct LsExplanation *e);

/*
 # Safety
 `e` must be null or a handle not yet freed.
 */
void ls_explanation_free(struct LsExplanation *e);

/*
 Runs `config.repeats` explanations with seeds derived from
 `config.master_seed` and scores their stability.

 # Safety
 As for [`ls_explain`].
 */
enum LsStatus ls_stability(const struct LsPredictor *predictor,
                           const struct LsStats *stats,
                           const double *point,
                           const struct LsConfig *config,
                           struct LsReport **out);

/*
 Like [`ls_stability`] but every repeat uses `seed`, so all repeats are
 identical. Useful only as a diagnostic.

 # Safety
 As for [`ls_explain`].
 */
enum LsStatus ls_stability_fixed_seed(const struct LsPredictor *predictor,
                                      const struct LsStats *stats,
                                      const double *point,
                                      const struct LsConfig *config,
                                      uint64_t seed,
                                      struct LsReport **out);

/*
 Variables Stability Index, percent.

 # Safety
 `r` must be a live handle.
 */
double ls_report_vsi(const struct LsReport *r);

/*
 Coefficients Stability Index, percent.

 # Safety
 `r` must be a live handle.
 */
double ls_report_csi(const struct LsReport *r);

/*
 # Safety
 `r` must be a live handle.
 */
uintptr_t ls_report_num_models(const struct LsReport *r);

/*
 Partial index of `feature`. Fails with [`LsStatus::OutOfRange`] when the
 feature was not scored.

 # Safety
 `r` must be a live handle and `out` writable.
 */
enum LsStatus ls_report_partial_index(const struct LsReport *r, uintptr_t feature, double *out);

/*
 The report as JSON; free with [`ls_string_free`]. Null on failure.

 # Safety
 `r` must be a live handle.
 */
char *ls_report_to_json(const struct LsReport *r);

/*
 # Safety
 `r` must be null or a handle not yet freed.
 */
void ls_report_free(struct LsReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIME_STABILITY_H */
