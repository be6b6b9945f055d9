#ifndef AF2LAB_H
#define AF2LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum af2_status {
  AF2_STATUS_OK = 0,
  AF2_STATUS_FAIL = 1,
  AF2_STATUS_USAGE = 2,
  AF2_STATUS_UNKNOWN = 3,
  AF2_STATUS_NULL_ARGUMENT = 4,
  AF2_STATUS_INVALID_UTF8 = 5,
  AF2_STATUS_PARSE = 6,
  AF2_STATUS_PANIC = 7,
} af2_status;

/**
 * The result of one command.
 */
typedef struct af2_report af2_report;

/**
 * A set of parsed workspace files.
 */
typedef struct af2_workspace af2_workspace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last error on this thread; empty when none.
 */
const char *af2_last_error(void);

/**
 * The workspace files shipped with the library.
 */
struct af2_workspace *af2_workspace_bundled(void);

/**
 * Parses one workspace file from `text`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum af2_status af2_workspace_parse(const char *text, struct af2_workspace **out);

/**
 * # Safety
 * `ws` must come from this library and not be used afterwards.
 */
void af2_workspace_free(struct af2_workspace *ws);

/**
 * Runs a command line such as `{"check"}` or
 * `{"complete", "--type", "Bool", "--size", "7"}` against `ws`. The
 * report is stored in `out` whenever the command ran; the status mirrors
 * the command-line exit code.
 *
 * # Safety
 * `ws` must be a live handle, `argv` must point to `argc` NUL-terminated
 * strings and `out` must be a valid pointer.
 */
enum af2_status af2_run(const struct af2_workspace *ws,
                        const char *const *argv,
                        size_t argc,
                        struct af2_report **out);

/**
 * The printed report, one line per item.
 *
 * # Safety
 * `r` must be a live handle or null.
 */
const char *af2_report_text(const struct af2_report *r);

/**
 * # Safety
 * `r` must be a live handle or null.
 */
enum af2_status af2_report_status(const struct af2_report *r);

/**
 * Number of PASS/FAIL/UNKNOWN items.
 *
 * # Safety
 * `r` must be a live handle or null.
 */
size_t af2_report_item_count(const struct af2_report *r);

/**
 * # Safety
 * `r` must come from this library and not be used afterwards.
 */
void af2_report_free(struct af2_report *r);

/**
 * ∀₂⁺ and ∀₂⁻ membership of a formula over the signature of `ws`.
 *
 * # Safety
 * `ws` must be a live handle, `formula` a NUL-terminated string and
 * `positive`, `negative` valid pointers.
 */
enum af2_status af2_classify(const struct af2_workspace *ws,
                             const char *formula,
                             bool *positive,
                             bool *negative);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AF2LAB_H */
