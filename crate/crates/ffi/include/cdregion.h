#ifndef CDREGION_H
#define CDREGION_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Number of entries in a bound vector.
#define CD_BOUND_COUNT 15

// Result code of every fallible call.
typedef enum CdStatus {
  CD_STATUS_OK = 0,
  // A required pointer argument was null.
  CD_STATUS_NULL_ARGUMENT = 1,
  // Malformed JSON, invalid UTF-8, or a channel/scheme/config that fails
  // validation.
  CD_STATUS_INVALID = 2,
  // A tensor, codebook or search space exceeds its cap.
  CD_STATUS_CAPACITY = 3,
  // No feasible result exists.
  CD_STATUS_EMPTY = 4,
  // The caller's buffer is too short; the required length was written.
  CD_STATUS_BUFFER_TOO_SMALL = 5,
  // An internal error; the library state is still usable.
  CD_STATUS_INTERNAL = 6,
} CdStatus;

typedef struct CdChannel CdChannel;

typedef struct CdRegion CdRegion;

typedef struct CdScheme CdScheme;

// Best scheme found by a rate search.
typedef struct CdBestRate {
  double objective;
  double rates[3];
  double distortion;
} CdBestRate;

// Summary of one simulation run.
typedef struct CdSimSummary {
  size_t n;
  size_t trials;
  size_t message_errors;
  double error_rate;
  double ci_low;
  double ci_high;
  double mean_distortion;
  // Standard error of `mean_distortion`.
  double distortion_stderr;
} CdSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *cd_version(void);

// Message of the last failed call on this thread (empty after a success).
// The pointer stays valid until the next call on the same thread.
const char *cd_last_error(void);

// Parses a channel document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum CdStatus cd_channel_from_json(const char *json, struct CdChannel **out);

// # Safety
// `channel` must be null or a handle from [`cd_channel_from_json`] that
// has not been freed.
void cd_channel_free(struct CdChannel *channel);

// Parses a scheme document against `channel`.
//
// # Safety
// `channel` must be a live handle, `json` a NUL-terminated string and `out`
// a writable pointer.
enum CdStatus cd_scheme_from_json(const struct CdChannel *channel,
                                  const char *json,
                                  struct CdScheme **out);

// # Safety
// `scheme` must be null or a live handle from [`cd_scheme_from_json`].
void cd_scheme_free(struct CdScheme *scheme);

// Counts the structural violations of a channel/scheme pair; the first one
// is available through [`cd_last_error`].
//
// # Safety
// Handles must be live and `violations` writable.
enum CdStatus cd_validate(const struct CdChannel *channel,
                          const struct CdScheme *scheme,
                          size_t *violations);

// Evaluates the region of a scheme. `joint_cap` bounds the joint tensor
// size; zero selects the default.
//
// # Safety
// Handles must be live and `out` writable.
enum CdStatus cd_region_new(const struct CdChannel *channel,
                            const struct CdScheme *scheme,
                            size_t joint_cap,
                            struct CdRegion **out);

// # Safety
// `region` must be null or a live handle from [`cd_region_new`].
void cd_region_free(struct CdRegion *region);

// Copies the [`CD_BOUND_COUNT`] information bounds, in the order common,
// feedback1, feedback2, coop1, coop2, coop_sum, private1, private2,
// private_sum, desc1, desc2, desc_sum, refine1, refine2, refine_sum.
//
// # Safety
// `region` must be live and `out` must hold `len` doubles.
enum CdStatus cd_region_bounds(const struct CdRegion *region, double *out, size_t len);

// Expected distortion of the optimal estimator from all auxiliaries and
// the receiver output.
//
// # Safety
// `region` must be live and `out` writable.
enum CdStatus cd_region_distortion(const struct CdRegion *region, double *out);

// Writes the polytope vertices as `(R0, R1, R2)` triples. `count` receives
// the number of vertices; when `len < 3 * count` nothing else is written
// and [`CdStatus::BufferTooSmall`] is returned. `out` may be null to query
// the count.
//
// # Safety
// `region` must be live, `count` writable and `out` null or sized `len`.
enum CdStatus cd_region_vertices(const struct CdRegion *region,
                                 double *out,
                                 size_t len,
                                 size_t *count);

// Whether `(r0, r1, r2)` lies in the region.
//
// # Safety
// `region` must be live and `out` writable.
enum CdStatus cd_region_contains(const struct CdRegion *region,
                                 double r0,
                                 double r1,
                                 double r2,
                                 bool *out);

// Minimal expected distortion estimating the state from `count` named
// variables. `joint_cap` of zero selects the default.
//
// # Safety
// Handles must be live, `names` must point to `count` NUL-terminated
// strings and `out` must be writable.
enum CdStatus cd_min_distortion(const struct CdChannel *channel,
                                const struct CdScheme *scheme,
                                const char *const *names,
                                size_t count,
                                size_t joint_cap,
                                double *out);

// Searches for the best scheme on `channel` under the JSON search settings
// (an empty object selects the defaults).
//
// # Safety
// `channel` must be live, `config_json` NUL-terminated and `out` writable.
enum CdStatus cd_best_rate(const struct CdChannel *channel,
                           const char *config_json,
                           struct CdBestRate *out);

// Runs the coding simulator with the JSON simulation settings.
//
// # Safety
// Handles must be live, `params_json` NUL-terminated and `out` writable.
enum CdStatus cd_simulate(const struct CdChannel *channel,
                          const struct CdScheme *scheme,
                          const char *params_json,
                          struct CdSimSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CDREGION_H */
