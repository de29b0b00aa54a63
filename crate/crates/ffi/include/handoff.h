#ifndef HANDOFF_H
#define HANDOFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum HoStatus {
  HO_STATUS_OK = 0,
  HO_STATUS_NULL_POINTER = 1,
  HO_STATUS_INVALID_ARGUMENT = 2,
  HO_STATUS_INVALID_CONFIG = 3,
  HO_STATUS_NUMERICAL = 4,
  HO_STATUS_SIMULATION = 5,
  HO_STATUS_IO = 6,
  HO_STATUS_OUT_OF_RANGE = 7,
  HO_STATUS_PANIC = 99,
} HoStatus;

/**
 * Parsed, validated experiment config.
 */
typedef struct HoExperiment HoExperiment;

/**
 * Result of running an experiment.
 */
typedef struct HoSummary HoSummary;

/**
 * One BS tier.
 */
typedef struct HoTier {
  /**
   * BS per m².
   */
  double density;
  /**
   * Watts.
   */
  double tx_power;
  double bias;
  double pathloss_exponent;
} HoTier;

/**
 * One row of an experiment summary. Missing values are NaN.
 */
typedef struct HoRow {
  double x;
  double analytical;
  double sim_mean;
  double sim_std_error;
  uint64_t sim_n;
  double rel_gap;
} HoRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ho_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *ho_last_error(void);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void ho_string_free(char *s);

/**
 * One-period handoff probability of a single-tier PPP network.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum HoStatus ho_handoff_prob(double v, double lambda, double *out);

/**
 * Handoff rate of a single-tier PPP network for mobility moments
 * `E[V]`, `E[T]`, `E[S]`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum HoStatus ho_handoff_rate_ppp(double lambda, double e_v, double e_t, double e_s, double *out);

/**
 * Handoff rate of a drone with 3-D mean speed `v_bar`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum HoStatus ho_drone_handoff_rate(double v_bar, double lambda, double *out);

/**
 * Mean sojourn time in the initial cell, censored at `period`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum HoStatus ho_sojourn_time(double v, double period, double lambda, double *out);

/**
 * Total handoff probability of a multi-tier network under biased
 * association.
 *
 * # Safety
 * `tiers` must point to `n_tiers` readable `HoTier` values; `out` must be a
 * valid pointer to a `double`.
 */
enum HoStatus ho_multi_tier_handoff_prob(double v,
                                         const struct HoTier *tiers,
                                         size_t n_tiers,
                                         double *out);

/**
 * Checks an experiment config. Writes the number of problems to
 * `n_problems` and, when `report` is non-NULL, a newline-separated
 * `line:column: path: message` listing (free with `ho_string_free`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `n_problems` must be valid;
 * `report` may be NULL.
 */
enum HoStatus ho_validate_config(const char *json, size_t *n_problems, char **report);

/**
 * Parses and validates an experiment config.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
enum HoStatus ho_experiment_from_json(const char *json, struct HoExperiment **out);

/**
 * Overrides the base seed and replication count (0 keeps the config's).
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum HoStatus ho_experiment_set_plan(struct HoExperiment *exp,
                                     uint64_t base_seed,
                                     size_t n_replications);

/**
 * Turns the Monte Carlo side on or off.
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum HoStatus ho_experiment_set_simulate(struct HoExperiment *exp, bool simulate);

/**
 * Runs the experiment.
 *
 * # Safety
 * `exp` must be a live handle; `out` must be valid.
 */
enum HoStatus ho_experiment_run(const struct HoExperiment *exp, struct HoSummary **out);

/**
 * Releases an experiment handle. NULL is ignored.
 *
 * # Safety
 * `exp` must come from `ho_experiment_from_json` and not be freed twice.
 */
void ho_experiment_free(struct HoExperiment *exp);

/**
 * Number of result rows.
 *
 * # Safety
 * `summary` must be a live handle or NULL (which yields 0).
 */
size_t ho_summary_row_count(const struct HoSummary *summary);

/**
 * Copies row `index` into `out`.
 *
 * # Safety
 * `summary` must be a live handle; `out` must be valid.
 */
enum HoStatus ho_summary_row(const struct HoSummary *summary, size_t index, struct HoRow *out);

/**
 * Series label of row `index` (free with `ho_string_free`).
 *
 * # Safety
 * `summary` must be a live handle; `out` must be valid.
 */
enum HoStatus ho_summary_row_series(const struct HoSummary *summary, size_t index, char **out);

/**
 * Full summary as JSON (free with `ho_string_free`).
 *
 * # Safety
 * `summary` must be a live handle; `out` must be valid.
 */
enum HoStatus ho_summary_to_json(const struct HoSummary *summary, char **out);

/**
 * Releases a summary handle. NULL is ignored.
 *
 * # Safety
 * `summary` must come from `ho_experiment_run` and not be freed twice.
 */
void ho_summary_free(struct HoSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HANDOFF_H */
