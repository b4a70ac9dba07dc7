#ifndef KINSIM_H
#define KINSIM_H

#include <stddef.h>
#include <stdint.h>

typedef enum KinsimStatus {
  KINSIM_STATUS_OK = 0,
  KINSIM_STATUS_NULL_POINTER = 1,
  KINSIM_STATUS_INVALID_ARGUMENT = 2,
  KINSIM_STATUS_OUT_OF_RANGE = 3,
  KINSIM_STATUS_GROWTH_FAILURE = 4,
  KINSIM_STATUS_IO = 5,
  KINSIM_STATUS_SCHEMA_MISMATCH = 6,
  KINSIM_STATUS_MANIFEST_MISSING = 7,
  KINSIM_STATUS_DEGENERATE_INPUT = 8,
  KINSIM_STATUS_INTERNAL = 9,
} KinsimStatus;

/*
 Per-run summaries and figure tables of one library.
 */
typedef struct KinsimAnalysis KinsimAnalysis;

/*
 A simulated population library.
 */
typedef struct KinsimLibrary KinsimLibrary;

/*
 Library parameters. See [`kinsim_library_config_default`].
 */
typedef struct KinsimLibraryConfig {
  size_t runs;
  double fertility_min;
  double fertility_max;
  size_t target_size;
  uint32_t generations;
  uint64_t master_seed;
  double buffer;
  double retry_growth;
} KinsimLibraryConfig;

/*
 Analysis parameters. `pair_sample == 0` regresses on every pair.
 */
typedef struct KinsimAnalysisOptions {
  size_t relative_cap;
  size_t total_cap;
  double delta_bucket;
  size_t pair_sample;
  size_t bands;
} KinsimAnalysisOptions;

typedef struct KinsimRunInfo {
  size_t run_id;
  double kappa_target;
  double kappa_realized;
  uint64_t seed;
  size_t n_final;
  size_t cohort_size;
  uint32_t attempts;
} KinsimRunInfo;

typedef struct KinsimFig9Row {
  size_t run_id;
  double kappa_target;
  double adj_r2_kinship;
  double adj_r2_similarity;
  size_t n_pairs;
  uint32_t effective_degree_kin;
  uint32_t effective_degree_sim;
} KinsimFig9Row;

/*
 Coefficients of `1, x, x^2, x^3` in the caller's units.
 */
typedef struct KinsimCubicFit {
  double coefficients[4];
  size_t n;
  double r2;
  double adj_r2;
  uint32_t effective_degree;
} KinsimCubicFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Fills `out` with the full-library defaults (400 runs of 2000 agents).

 # Safety
 `out` must be null or valid for writes.
 */
enum KinsimStatus kinsim_library_config_default(struct KinsimLibraryConfig *out);

/*
 Fills `out` with the default analysis options (caps 50/60, 10 degree trait
 buckets, all pairs, five bands).

 # Safety
 `out` must be null or valid for writes.
 */
enum KinsimStatus kinsim_analysis_options_default(struct KinsimAnalysisOptions *out);

/*
 Simulates a library on `workers` threads (0 = all cores).

 # Safety
 `config` must be null or point to a valid config; `out` must be null or
 valid for writes. On success `*out` owns a handle for
 [`kinsim_library_free`].
 */
enum KinsimStatus kinsim_library_build(const struct KinsimLibraryConfig *config,
                                       size_t workers,
                                       struct KinsimLibrary **out);

/*
 # Safety
 `library` must be null or a handle from [`kinsim_library_build`] that has
 not been freed.
 */
void kinsim_library_free(struct KinsimLibrary *library);

/*
 Number of runs, or 0 for a null handle.

 # Safety
 `library` must be null or a live handle.
 */
size_t kinsim_library_len(const struct KinsimLibrary *library);

/*
 # Safety
 `library` must be null or a live handle; `out` null or valid for writes.
 */
enum KinsimStatus kinsim_library_run_info(const struct KinsimLibrary *library,
                                          size_t index,
                                          struct KinsimRunInfo *out);

/*
 Copies the row-major shared great-great-grandparent matrix of one run
 into `out`, which must hold `cohort_size * cohort_size` bytes.

 # Safety
 `library` must be null or a live handle; `out` null or valid for `len`
 byte writes.
 */
enum KinsimStatus kinsim_library_relatedness(const struct KinsimLibrary *library,
                                             size_t index,
                                             uint8_t *out,
                                             size_t len);

/*
 Analyses every run of `library` and builds the figure tables.

 # Safety
 `library` must be a live handle, `options` null (defaults) or valid, and
 `out` valid for writes. On success `*out` owns a handle for
 [`kinsim_analysis_free`].
 */
enum KinsimStatus kinsim_analysis_run(const struct KinsimLibrary *library,
                                      const struct KinsimAnalysisOptions *options,
                                      size_t workers,
                                      struct KinsimAnalysis **out);

/*
 # Safety
 `analysis` must be null or a handle from [`kinsim_analysis_run`] that has
 not been freed.
 */
void kinsim_analysis_free(struct KinsimAnalysis *analysis);

/*
 # Safety
 `analysis` must be null or a live handle.
 */
size_t kinsim_analysis_len(const struct KinsimAnalysis *analysis);

/*
 # Safety
 `analysis` must be null or a live handle; `out` null or valid for writes.
 */
enum KinsimStatus kinsim_analysis_mean_shared_gggp(const struct KinsimAnalysis *analysis,
                                                   size_t index,
                                                   double *out);

/*
 # Safety
 `analysis` must be null or a live handle; `out` null or valid for writes.
 */
enum KinsimStatus kinsim_analysis_fig9_row(const struct KinsimAnalysis *analysis,
                                           size_t index,
                                           struct KinsimFig9Row *out);

/*
 Writes fig5.csv .. fig9.csv into `dir`, creating it if needed.

 # Safety
 `analysis` must be a live handle and `dir` a NUL-terminated string.
 */
enum KinsimStatus kinsim_analysis_write_tables(const struct KinsimAnalysis *analysis,
                                               const char *dir);

/*
 Runs `kinsim all`: generate into `out_dir`, then analyse. `preset` is 0
 for the full library and 1 for the desk preset; `config_path` may be null.

 # Safety
 `out_dir` must be a NUL-terminated string; `config_path` null or one.
 */
enum KinsimStatus kinsim_run_all(uint32_t preset,
                                 const char *config_path,
                                 uint64_t seed,
                                 size_t workers,
                                 const char *out_dir);

/*
 Circular distance between two compass readings in degrees, in [0, 180].
 */
double kinsim_compass_distance(double a, double b);

/*
 Least-squares cubic of `ys` on `xs` with adjusted R².

 # Safety
 `xs` and `ys` must be valid for `n` reads; `out` valid for writes.
 */
enum KinsimStatus kinsim_cubic_fit(const double *xs,
                                   const double *ys,
                                   size_t n,
                                   struct KinsimCubicFit *out);

/*
 Message for the last failed call on this thread, or null. Valid until
 the next call into this library from the same thread.
 */
const char *kinsim_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *kinsim_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KINSIM_H */
