/* C interface for the dualgeo verification library. */

#ifndef DUALGEO_H
#define DUALGEO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  DG_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DG_ERR_NULL_ARG = 1,
  /**
   * An input string was not valid UTF-8.
   */
  DG_ERR_UTF8 = 2,
  /**
   * The spec text failed to parse or validate.
   */
  DG_ERR_PARSE = 3,
  /**
   * Unknown zoo entry or suite name.
   */
  DG_ERR_UNKNOWN = 4,
  /**
   * A suite failed to evaluate.
   */
  DG_ERR_RUN = 5,
} dg_status;

/**
 * Opaque manifold handle.
 */
typedef struct dg_manifold dg_manifold;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *dg_last_error(void);

/**
 * Library version as a static string.
 */
const char *dg_version(void);

/**
 * Load a built-in zoo entry by name.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
dg_status dg_manifold_from_zoo(const char *name, dg_manifold **out);

/**
 * Parse a manifold description (the spec-file format) from text.
 *
 * # Safety
 * `text` and `name` must be valid NUL-terminated strings; `out` must be a
 * valid pointer to receive the handle.
 */
dg_status dg_manifold_from_spec_text(const char *text, const char *name, dg_manifold **out);

/**
 * Release a manifold handle. Null is tolerated.
 *
 * # Safety
 * `m` must be a handle from this library that has not been freed.
 */
void dg_manifold_free(dg_manifold *m);

/**
 * Run check suites. `suites_csv` is a comma-separated list of suite names
 * or `all`/null for the full catalog. On success `json_out` receives one
 * JSON record per check, newline-delimited, in catalog order.
 *
 * # Safety
 * `m` must be a live handle; `json_out` must be valid. The result must be
 * released with `dg_string_free`.
 */
dg_status dg_run_suites(const dg_manifold *m,
                        const char *suites_csv,
                        double tol,
                        uint32_t grid,
                        uint64_t seed,
                        char **json_out);

/**
 * Render the manifold in the spec-file format.
 *
 * # Safety
 * `m` must be a live handle; `text_out` must be valid. The result must be
 * released with `dg_string_free`.
 */
dg_status dg_export_spec(const dg_manifold *m, char **text_out);

/**
 * Newline-separated zoo entry names.
 *
 * # Safety
 * `text_out` must be valid; release the result with `dg_string_free`.
 */
dg_status dg_zoo_names(char **text_out);

/**
 * Release a string allocated by this library. Null is tolerated.
 *
 * # Safety
 * `s` must originate from this library and not have been freed.
 */
void dg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUALGEO_H */
