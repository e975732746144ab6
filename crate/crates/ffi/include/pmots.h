#ifndef PMOTS_H
#define PMOTS_H

/* Generated by cbindgen from pmots-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PmotsStatus {
  PMOTS_STATUS_OK = 0,
  PMOTS_STATUS_NULL_ARGUMENT = 1,
  PMOTS_STATUS_INVALID_UTF8 = 2,
  PMOTS_STATUS_INVALID_SCENARIO = 3,
  PMOTS_STATUS_RUNTIME_ERROR = 4,
  PMOTS_STATUS_INDEX_OUT_OF_RANGE = 5,
  PMOTS_STATUS_BUFFER_TOO_SMALL = 6,
  PMOTS_STATUS_IO_ERROR = 7,
} PmotsStatus;

/**
 * Opaque finished run: criteria names and the non-dominated front.
 */
typedef struct PmotsRun PmotsRun;

/**
 * Opaque parsed-and-validated scenario.
 */
typedef struct PmotsScenario PmotsScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the message from the most recent failure on this thread, or null.
 * The caller owns the returned string.
 */
char *pmots_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `text` must be a pointer previously returned by a `pmots_*` function and
 * not yet freed, or null.
 */
void pmots_string_free(char *text);

/**
 * Parses a scenario from TOML text into a new handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum PmotsStatus pmots_scenario_parse(const char *text, struct PmotsScenario **out);

/**
 * Reads and parses a scenario file into a new handle.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum PmotsStatus pmots_scenario_load(const char *path, struct PmotsScenario **out);

/**
 * Scenario seed (0 when the handle is null).
 *
 * # Safety
 * `scenario` must be a live handle from this library, or null.
 */
uint64_t pmots_scenario_seed(const struct PmotsScenario *scenario);

/**
 * Overrides the scenario seed.
 *
 * # Safety
 * `scenario` must be a live handle from this library.
 */
enum PmotsStatus pmots_scenario_set_seed(struct PmotsScenario *scenario, uint64_t seed);

/**
 * Releases a scenario handle.
 *
 * # Safety
 * `scenario` must be a live handle from this library, or null. It must not
 * be used afterwards.
 */
void pmots_scenario_free(struct PmotsScenario *scenario);

/**
 * Runs the search described by `scenario` and returns a run handle.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum PmotsStatus pmots_run(const struct PmotsScenario *scenario, struct PmotsRun **out);

/**
 * Releases a run handle.
 *
 * # Safety
 * `run` must be a live handle from this library, or null. It must not be
 * used afterwards.
 */
void pmots_run_free(struct PmotsRun *run);

/**
 * Number of solutions on the front (0 for a null handle).
 *
 * # Safety
 * `run` must be a live handle from this library, or null.
 */
uintptr_t pmots_run_front_len(const struct PmotsRun *run);

/**
 * Number of criteria per solution (0 for a null handle).
 *
 * # Safety
 * `run` must be a live handle from this library, or null.
 */
uintptr_t pmots_run_criteria_count(const struct PmotsRun *run);

/**
 * Total neighbor evaluations performed by the search.
 *
 * # Safety
 * `run` must be a live handle from this library, or null.
 */
uint64_t pmots_run_total_evaluations(const struct PmotsRun *run);

/**
 * Identifier of the front row at `index`.
 *
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum PmotsStatus pmots_run_row_id(const struct PmotsRun *run, uintptr_t index, uint64_t *out);

/**
 * Copies the criterion values of the front row at `index` into `buffer`
 * (`buffer_len` must be at least the criteria count).
 *
 * # Safety
 * `run` must be a live handle and `buffer` must point to at least
 * `buffer_len` writable doubles.
 */
enum PmotsStatus pmots_run_row_objectives(const struct PmotsRun *run,
                                          uintptr_t index,
                                          double *buffer,
                                          uintptr_t buffer_len);

/**
 * Textual encoding of the front row at `index`; null on error. The caller
 * owns the returned string.
 *
 * # Safety
 * `run` must be a live handle from this library, or null.
 */
char *pmots_run_row_encoding(const struct PmotsRun *run, uintptr_t index);

/**
 * Name of the criterion at `index`; null on error. The caller owns the
 * returned string.
 *
 * # Safety
 * `run` must be a live handle from this library, or null.
 */
char *pmots_run_criterion_name(const struct PmotsRun *run, uintptr_t index);

/**
 * Writes the front as CSV (the same schema the CLI exports) to `path`.
 *
 * # Safety
 * `run` must be a live handle and `path` a valid NUL-terminated string.
 */
enum PmotsStatus pmots_run_write_csv(const struct PmotsRun *run, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PMOTS_H */
