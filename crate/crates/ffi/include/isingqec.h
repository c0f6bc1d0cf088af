#ifndef ISINGQEC_H
#define ISINGQEC_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IqStatus {
  IQ_STATUS_OK = 0,
  IQ_STATUS_NULL_POINTER = 1,
  IQ_STATUS_INVALID_CONFIG = 2,
  IQ_STATUS_IO = 3,
  IQ_STATUS_PARSE = 4,
  IQ_STATUS_SIMULATION = 5,
  /**
   * `iq_replay_verify` ran but the trace did not verify.
   */
  IQ_STATUS_VERIFICATION_FAILED = 6,
  IQ_STATUS_PANIC = 7,
} IqStatus;

/**
 * Simulation parameters.
 */
typedef struct IqConfig IqConfig;

/**
 * A completed trial.
 */
typedef struct IqTrial IqTrial;

/**
 * Aggregate of one batch of trials.
 */
typedef struct IqResultRow {
  uint32_t l;
  double p;
  uint32_t rounds;
  uint64_t trials;
  uint64_t sigma_failures;
  uint64_t psi_failures;
  uint64_t failures_total;
  double failure_rate_per_round;
  double ci_low;
  double ci_high;
  uint64_t completion_timeouts;
  uint64_t master_seed;
} IqResultRow;

/**
 * Message of the last failed call on this thread, or null. Valid until the next call that fails.
 */
const char *iq_last_error(void);

/**
 * Creates a configuration with one trial and master seed 0.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IqStatus iq_config_new(uint32_t l, double p, uint32_t rounds, struct IqConfig **out);

/**
 * Parses a JSON configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IqStatus iq_config_from_json(const char *json, struct IqConfig **out);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum IqStatus iq_config_set_trials(struct IqConfig *cfg, uint64_t trials);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum IqStatus iq_config_set_seed(struct IqConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be null or a handle from this library, not yet freed.
 */
void iq_config_free(struct IqConfig *cfg);

/**
 * Runs all trials of `cfg` and writes the aggregate to `out`.
 *
 * `trace_dir` may be null; otherwise one JSONL trace per trial is written there.
 *
 * # Safety
 * `cfg` must be a live handle, `trace_dir` null or a NUL-terminated path, `out` a valid pointer.
 */
enum IqStatus iq_run(const struct IqConfig *cfg,
                     uint32_t workers,
                     const char *trace_dir,
                     struct IqResultRow *out);

/**
 * Runs trial `index` of `cfg`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum IqStatus iq_trial_run(const struct IqConfig *cfg, uint64_t index, struct IqTrial **out);

/**
 * Success flag of a trial: 1 success, 0 failure, -1 completion timed out.
 *
 * # Safety
 * `trial` must be a live handle and `out` a valid pointer.
 */
enum IqStatus iq_trial_success(const struct IqTrial *trial, int32_t *out);

/**
 * JSONL trace of a trial; release with [`iq_string_free`].
 *
 * # Safety
 * `trial` must be a live handle and `out` a valid pointer.
 */
enum IqStatus iq_trial_trace_json(const struct IqTrial *trial, char **out);

/**
 * # Safety
 * `trial` must be null or a handle from this library, not yet freed.
 */
void iq_trial_free(struct IqTrial *trial);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void iq_string_free(char *s);

/**
 * Re-analyses a trace file. Returns `VerificationFailed` if the recomputed
 * verdict or correction differs from the recorded one. `report_json` may be
 * null; otherwise it receives the report, to be released with [`iq_string_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated path; `report_json` null or a valid pointer.
 */
enum IqStatus iq_replay_verify(const char *path, char **report_json);

#endif  /* ISINGQEC_H */
