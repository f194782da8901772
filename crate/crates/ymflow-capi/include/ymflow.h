#ifndef YMFLOW_H
#define YMFLOW_H

/* Generated from the ymflow-capi crate by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  YMF_OK = 0,
  /**
   * Malformed argument, config violation, or structural mismatch.
   */
  YMF_ERR_INVALID = 1,
  /**
   * The stepper could not complete a step.
   */
  YMF_ERR_STEP = 2,
  /**
   * Unreadable or mismatched checkpoint data.
   */
  YMF_ERR_CHECKPOINT = 3,
  YMF_ERR_IO = 4,
  /**
   * A required pointer argument was null.
   */
  YMF_ERR_NULL = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  YMF_ERR_UTF8 = 6,
  /**
   * A panic was caught at the boundary; state may be inconsistent.
   */
  YMF_ERR_INTERNAL = 7,
} ymf_status;

/**
 * Parsed and validated run configuration.
 */
typedef struct ymf_config ymf_config;

/**
 * A connection one-form, typically loaded back from a checkpoint.
 */
typedef struct ymf_field ymf_field;

/**
 * A finished run: per-step series, verdicts, output locations.
 */
typedef struct ymf_run ymf_run;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI revision of this header; bumped on any breaking change.
 */
unsigned int ymf_abi_version(void);

/**
 * Message for the most recent failure on the calling thread.  The pointer
 * stays valid until the next failing call from the same thread.
 */
const char *ymf_last_error(void);

/**
 * Releases a string returned by this library.  Null is ignored.
 */
void ymf_string_free(char *s);

/**
 * Parses config text into a new handle.  On failure `*out` is untouched
 * and `ymf_last_error` lists every violation.
 */
ymf_status ymf_config_parse(const char *text, ymf_config **out);

/**
 * Reads and parses a config file.
 */
ymf_status ymf_config_read(const char *path, ymf_config **out);

/**
 * Canonical text form of a config; reparsing it yields an equal config.
 * Returns null only for a null handle.  Free with `ymf_string_free`.
 */
char *ymf_config_emit(const ymf_config *cfg);

/**
 * FNV-1a hash of the canonical text; zero only for a null handle.
 */
uint64_t ymf_config_hash64(const ymf_config *cfg);

/**
 * Redirects the run output directory without retyping the whole config.
 */
ymf_status ymf_config_set_output_dir(ymf_config *cfg, const char *dir);

void ymf_config_free(ymf_config *cfg);

/**
 * Executes a configured run end to end, writing series, verdicts and
 * checkpoints under the configured output directory.
 */
ymf_status ymf_run_execute(const ymf_config *cfg, ymf_run **out);

/**
 * Continues a checkpointed run.  A negative `t_end` keeps the configured
 * end time; nonzero `force` skips the embedded config hash check.
 */
ymf_status ymf_run_resume(const char *checkpoint, double t_end, int force, ymf_run **out);

/**
 * One when every verdict of the run passed, zero otherwise.
 */
int ymf_run_all_pass(const ymf_run *run);

uint64_t ymf_run_steps(const ymf_run *run);

/**
 * Final integration time actually reached.
 */
double ymf_run_time(const ymf_run *run);

/**
 * Number of recorded series rows: one per step plus the final time.
 */
size_t ymf_run_series_len(const ymf_run *run);

/**
 * Copies row `i` of the series: time, curvature energy, dissipation and
 * the curvature sup norm.  Null output slots are skipped.
 */
ymf_status ymf_run_series_sample(const ymf_run *run,
                                 size_t i,
                                 double *t,
                                 double *energy,
                                 double *dissipation,
                                 double *sup_curvature);

/**
 * Path of the final checkpoint written by the run.  Free with
 * `ymf_string_free`.
 */
char *ymf_run_final_checkpoint(const ymf_run *run);

void ymf_run_free(ymf_run *run);

/**
 * Loads the connection a checkpoint represents.  Smoothed checkpoints are
 * mapped back through their stored gauge, so the result always lives on
 * the original trajectory.
 */
ymf_status ymf_field_load(const char *path, ymf_field **out);

/**
 * L2 norm of the connection; negative only for a null handle.
 */
double ymf_field_l2_norm(const ymf_field *field);

/**
 * Squared L2 norm of the curvature of the connection.
 */
ymf_status ymf_field_energy(const ymf_field *field, double *out);

/**
 * Wilson trace around the axis-aligned rectangle spanned from `corner`
 * (three coordinates) by `len0` along `axis0` and `len1` along `axis1`,
 * discretized in sub-segments of length at most `subdiv`.
 */
ymf_status ymf_field_wilson_rect(const ymf_field *field,
                                 unsigned int axis0,
                                 unsigned int axis1,
                                 const double *corner,
                                 double len0,
                                 double len1,
                                 double subdiv,
                                 double *re,
                                 double *im);

void ymf_field_free(ymf_field *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* YMFLOW_H */
