#ifndef GABOR_RATIONAL_H
#define GABOR_RATIONAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible calls.
 */
typedef enum GrStatus {
  GR_STATUS_OK = 0,
  GR_STATUS_NULL_POINTER = 1,
  GR_STATUS_INVALID_WINDOW = 2,
  GR_STATUS_INVALID_LATTICE = 3,
  /**
   * A certifier hypothesis or numerical guard failed.
   */
  GR_STATUS_FAILED = 4,
  /**
   * The requested value is not present in the report.
   */
  GR_STATUS_NOT_AVAILABLE = 5,
  GR_STATUS_BUFFER_TOO_SMALL = 6,
  GR_STATUS_PANIC = 7,
} GrStatus;

/**
 * Certification method for [`gr_certify`].
 */
typedef enum GrMethod {
  GR_METHOD_AUTO = 0,
  GR_METHOD_HERGLOTZ = 1,
  GR_METHOD_IRRATIONAL = 2,
  GR_METHOD_HIGH_DENSITY = 3,
  GR_METHOD_NEAR_CRITICAL = 4,
  GR_METHOD_CRITICAL = 5,
  GR_METHOD_ORACLE = 6,
} GrMethod;

/**
 * Verdict of a report; values equal the CLI exit codes.
 */
typedef enum GrVerdict {
  GR_VERDICT_FRAME_CERTIFIED = 0,
  GR_VERDICT_NOT_FRAME_WITNESSED = 1,
  GR_VERDICT_INCONCLUSIVE = 2,
} GrVerdict;

/**
 * Opaque certification report.
 */
typedef struct GrReport GrReport;

/**
 * Opaque validated window.
 */
typedef struct GrWindow GrWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; valid until the next failing call.
 */
const char *gr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gr_version(void);

/**
 * Build a window `g(t) = Σ aₖ/(t − i wₖ)` from `n` coefficient and pole pairs.
 *
 * # Safety
 * The four arrays must hold `n` values each; `out` must be writable.
 */
enum GrStatus gr_window_new(const double *a_re,
                            const double *a_im,
                            const double *w_re,
                            const double *w_im,
                            size_t n,
                            struct GrWindow **out);

/**
 * # Safety
 * `w` must come from [`gr_window_new`] and not be freed twice.
 */
void gr_window_free(struct GrWindow *w);

/**
 * Number of terms, or 0 for a null handle.
 *
 * # Safety
 * `w` must be null or a live window handle.
 */
size_t gr_window_len(const struct GrWindow *w);

/**
 * Evaluate `g(t)`.
 *
 * # Safety
 * `w` must be a live window handle; `re` and `im` must be writable.
 */
enum GrStatus gr_window_eval(const struct GrWindow *w, double t, double *re, double *im);

/**
 * Certify `w` on the lattice `αℤ × βℤ`. A nonzero `cross_check` also runs the
 * finite-section estimate and records it in the diagnostics.
 *
 * # Safety
 * `w` must be a live window handle; `out` must be writable.
 */
enum GrStatus gr_certify(const struct GrWindow *w,
                         double alpha,
                         double beta,
                         enum GrMethod m,
                         int32_t cross_check,
                         struct GrReport **out);

/**
 * # Safety
 * `r` must come from [`gr_certify`] and not be freed twice.
 */
void gr_report_free(struct GrReport *r);

/**
 * Verdict of a report; `Inconclusive` for a null handle.
 *
 * # Safety
 * `r` must be null or a live report handle.
 */
enum GrVerdict gr_report_verdict(const struct GrReport *r);

/**
 * Lower criterion bound `A_crit`.
 *
 * # Safety
 * `r` must be a live report handle; `out` must be writable.
 */
enum GrStatus gr_report_a_crit(const struct GrReport *r, double *out);

/**
 * Upper criterion bound `B_crit`.
 *
 * # Safety
 * `r` must be a live report handle; `out` must be writable.
 */
enum GrStatus gr_report_b_crit(const struct GrReport *r, double *out);

/**
 * Report as JSON; release with [`gr_string_free`]. Null on failure.
 *
 * # Safety
 * `r` must be a live report handle.
 */
char *gr_report_to_json(const struct GrReport *r);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void gr_string_free(char *s);

/**
 * Roots of the degree-3 obstruction equation at `alpha`, sorted by real then
 * imaginary part. Writes up to `cap` roots and the total count to `len`.
 *
 * # Safety
 * `re` and `im` must hold `cap` values; `len` must be writable.
 */
enum GrStatus gr_obstruction_roots(double alpha, double *re, double *im, size_t cap, size_t *len);

/**
 * Parse a window file (JSON `{"a": [[re, im], ...], "w": [...]}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GrStatus gr_window_from_json(const char *json, struct GrWindow **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GABOR_RATIONAL_H */
