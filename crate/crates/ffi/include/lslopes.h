#ifndef LSLOPES_H
#define LSLOPES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_INPUT = 2,
  LS_STATUS_NOT_PRIME = 3,
  LS_STATUS_BUDGET = 4,
  LS_STATUS_PRECISION = 5,
  LS_STATUS_BUFFER_TOO_SMALL = 6,
  LS_STATUS_OVERFLOW = 7,
  LS_STATUS_INTERNAL = 8,
  LS_STATUS_PANIC = 9,
} LsStatus;

typedef enum LsRoute {
  LS_ROUTE_PREDICT = 0,
  LS_ROUTE_LFUN = 1,
  LS_ROUTE_DWORK = 2,
  LS_ROUTE_LEMMA = 3,
  LS_ROUTE_VERIFY = 4,
} LsRoute;

typedef enum LsVerdict {
  LS_VERDICT_MATCH = 0,
  LS_VERDICT_PREFIX_MATCH = 1,
  LS_VERDICT_MISMATCH = 2,
  LS_VERDICT_HYPOTHESIS_FAILED = 3,
  LS_VERDICT_INCOMPLETE = 4,
} LsVerdict;

// Opaque run configuration.
typedef struct LsConfig LsConfig;

// Opaque verification report.
typedef struct LsReport LsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// New configuration for `x^d + x^{d-1}` over `F_p` with `M = 1`, route
// verify, one thread and no cache. Returns NULL only on allocation panic.
struct LsConfig *ls_config_new(uint64_t p, uint32_t d);

// Releases a configuration. NULL is ignored.
void ls_config_free(struct LsConfig *cfg);

// Sets `h` and resets `a` to `1` in the canonical basis.
enum LsStatus ls_config_set_h(struct LsConfig *cfg, size_t h);

// Coordinates of `a`; `len` must equal the current `h`.
enum LsStatus ls_config_set_a(struct LsConfig *cfg, const uint64_t *coords, size_t len);

// Character level `M` (order `p^M`).
enum LsStatus ls_config_set_level(struct LsConfig *cfg, uint32_t level);

enum LsStatus ls_config_set_route(struct LsConfig *cfg, enum LsRoute route);

// Largest `m` enumerated; 0 means up to the degree.
enum LsStatus ls_config_set_max_m(struct LsConfig *cfg, uint32_t max_m);

// Dwork matrix size; 0 means the default.
enum LsStatus ls_config_set_truncation(struct LsConfig *cfg, size_t n);

enum LsStatus ls_config_set_threads(struct LsConfig *cfg, size_t threads);

// Cache directory for exponential sums; NULL disables the cache.
enum LsStatus ls_config_set_cache_dir(struct LsConfig *cfg, const char *dir);

// Runs the configured routes. On `LS_STATUS_OK` `*out` owns a report.
// Budget and precision trouble inside a route is part of the report, not
// a failing status.
enum LsStatus ls_verify(const struct LsConfig *cfg, struct LsReport **out);

void ls_report_free(struct LsReport *report);

enum LsStatus ls_report_verdict(const struct LsReport *report, enum LsVerdict *out);

// Process exit code the CLI would use for this report; -1 for NULL.
int32_t ls_report_exit_code(const struct LsReport *report);

// The report as JSON; free with `ls_string_free`. NULL on failure.
char *ls_report_json(const struct LsReport *report);

void ls_string_free(char *s);

// Predicted slopes as `nums[i]/dens[i]`. `*len` receives the slope count;
// if it exceeds `cap` nothing is written and `LS_STATUS_BUFFER_TOO_SMALL`
// is returned, so a first call with `cap = 0` sizes the buffers.
enum LsStatus ls_predicted_slopes(uint64_t p,
                                  uint32_t d,
                                  uint32_t h,
                                  uint32_t level,
                                  int64_t *nums,
                                  int64_t *dens,
                                  size_t cap,
                                  size_t *len);

// Message of the last failure on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *ls_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSLOPES_H */
