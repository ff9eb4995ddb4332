#ifndef MECMOB_H
#define MECMOB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MecStatus {
  MEC_STATUS_OK = 0,
  MEC_STATUS_NULL_POINTER = 1,
  MEC_STATUS_INVALID_CONFIG = 2,
  MEC_STATUS_PARSE = 3,
  MEC_STATUS_DOMAIN = 4,
  MEC_STATUS_PRECONDITION = 5,
  MEC_STATUS_INVALID_ARGUMENT = 6,
  MEC_STATUS_IO = 7,
  MEC_STATUS_PANIC = 8,
} MecStatus;

typedef enum MecScheme {
  MEC_SCHEME_PROPOSED = 0,
  MEC_SCHEME_RSS_ONLY = 1,
  MEC_SCHEME_RSS_HYSTERESIS = 2,
} MecScheme;

/**
 * Single-user controller with its own virtual queue.
 */
typedef struct MecController MecController;

/**
 * Scenario configuration.
 */
typedef struct MecScenario MecScenario;

/**
 * Summary of one single-user run.
 */
typedef struct MecRunReport {
  uint64_t seed;
  uint64_t frames;
  /**
   * Joules per slot.
   */
  double energy_avg;
  double failure_rate;
  double final_window_failure_rate;
  bool satisfies_eps;
  double mean_queue;
  double max_queue;
  /**
   * Percentage of frames that migrated.
   */
  double migration_pct;
  uint64_t drift_violations;
} MecRunReport;

/**
 * Outcome of one slot's power decision.
 */
typedef struct MecSlotOutcome {
  double power;
  double energy;
  bool failed;
} MecSlotOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a
 * successful call. The pointer stays valid until the next call on the
 * same thread.
 */
const char *mec_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mec_version(void);

/**
 * Creates a scenario with every parameter at its default.
 *
 * # Safety
 * `out` must be NULL or valid for a pointer write.
 */
enum MecStatus mec_scenario_default(struct MecScenario **out);

/**
 * Parses a scenario from TOML text; missing fields take their defaults.
 *
 * # Safety
 * `toml` must be NULL or a NUL-terminated string; `out` must be NULL or
 * valid for a pointer write.
 */
enum MecStatus mec_scenario_from_toml(const char *toml, struct MecScenario **out);

/**
 * # Safety
 * `scenario` must be NULL or a live handle.
 */
enum MecStatus mec_scenario_set_seed(struct MecScenario *scenario, uint64_t seed);

/**
 * Releases a scenario. NULL is ignored.
 *
 * # Safety
 * `scenario` must be NULL or a handle not yet freed.
 */
void mec_scenario_free(struct MecScenario *scenario);

/**
 * Simulates the scenario under `scheme` and fills `out`.
 *
 * # Safety
 * `scenario` must be NULL or a live handle; `out` must be NULL or valid for
 * a write.
 */
enum MecStatus mec_run(const struct MecScenario *scenario,
                       enum MecScheme scheme,
                       struct MecRunReport *out);

/**
 * Exponential integral `E1(x)` for `x > 0`.
 *
 * # Safety
 * `out` must be NULL or valid for a write.
 */
enum MecStatus mec_exp_integral_e1(double x, double *out);

/**
 * Creates a controller for the scenario, with an empty virtual queue.
 *
 * # Safety
 * `scenario` must be NULL or a live handle; `out` must be NULL or valid for
 * a pointer write.
 */
enum MecStatus mec_controller_new(const struct MecScenario *scenario, struct MecController **out);

/**
 * Releases a controller. NULL is ignored.
 *
 * # Safety
 * `controller` must be NULL or a handle not yet freed.
 */
void mec_controller_free(struct MecController *controller);

/**
 * # Safety
 * `controller` must be NULL or a live handle; `out` must be NULL or valid
 * for a write.
 */
enum MecStatus mec_controller_queue_len(const struct MecController *controller, double *out);

/**
 * Advances the virtual queue by one slot with failure indicator `failure`
 * (0 or 1) and writes the new length to `out`, which may be NULL.
 *
 * # Safety
 * `controller` must be NULL or a live handle; `out` must be NULL or valid
 * for a write.
 */
enum MecStatus mec_controller_queue_update(struct MecController *controller,
                                           double failure,
                                           double *out);

/**
 * Optimal transmit power for one slot at the controller's current queue
 * length. `queue_len` is taken from the controller, not from the caller.
 *
 * # Safety
 * `controller` must be NULL or a live handle; `out` must be NULL or valid
 * for a write.
 */
enum MecStatus mec_controller_optimal_power(const struct MecController *controller,
                                            double gain,
                                            double compute_rate,
                                            bool arrival,
                                            bool during_migration,
                                            struct MecSlotOutcome *out);

/**
 * Frame-start association: picks the BS minimising the expected frame cost
 * given large-scale gains and compute rates of all `num_bs` stations.
 *
 * # Safety
 * `controller` must be NULL or a live handle; `gains` and `rates` must be
 * NULL or point to `num_bs` readable values; `out_bs` must be NULL or valid
 * for a write; `out_migrated` may be NULL.
 */
enum MecStatus mec_controller_decide(const struct MecController *controller,
                                     const double *gains,
                                     const double *rates,
                                     size_t num_bs,
                                     size_t prev,
                                     size_t *out_bs,
                                     bool *out_migrated);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MECMOB_H */
