#ifndef NONLOCAL_H
#define NONLOCAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum NlStatus {
  NL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NL_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  NL_STATUS_INVALID_UTF8 = 2,
  /**
   * An argument was rejected: bad party count, parameter or syntax.
   */
  NL_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The operation does not apply to this input.
   */
  NL_STATUS_PRECONDITION = 4,
  /**
   * The input exceeds a size the exact algorithms support.
   */
  NL_STATUS_SIZE_LIMIT = 5,
  /**
   * Malformed box or wiring data.
   */
  NL_STATUS_FORMAT = 6,
  /**
   * A Rust panic was caught at the boundary; this is a library bug.
   */
  NL_STATUS_INTERNAL = 7,
} NlStatus;

/**
 * Opaque handle to a Boolean function in algebraic normal form.
 */
typedef struct NlAnf NlAnf;

/**
 * Opaque handle to a box.
 */
typedef struct NlBox NlBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none failed.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *nl_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void nl_string_free(char *s);

/**
 * The n-party PR box: outputs have parity `x_1 ⋯ x_n`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum NlStatus nl_box_npr(size_t n, struct NlBox **out);

/**
 * The uniformly random even-parity box.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum NlStatus nl_box_even_parity(size_t n, struct NlBox **out);

/**
 * `eps·PR + (1-eps)·even-parity`, with `eps` a rational string in `[0, 1]`.
 *
 * # Safety
 * `eps` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum NlStatus nl_box_correlated(size_t n, const char *eps, struct NlBox **out);

/**
 * The box whose outputs have parity `f(x)`.
 *
 * # Safety
 * `f` must be a live function handle; `out` must be valid for writes.
 */
enum NlStatus nl_box_full_correlation(const struct NlAnf *f, struct NlBox **out);

/**
 * Parses a box from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum NlStatus nl_box_from_json(const char *json, struct NlBox **out);

/**
 * Serializes a box to JSON.
 *
 * # Safety
 * `b` must be a live box handle; `out` must be valid for writes.
 */
enum NlStatus nl_box_to_json(const struct NlBox *b, char **out);

/**
 * Releases a box. Null is ignored.
 *
 * # Safety
 * `b` must be null or a box handle not yet freed.
 */
void nl_box_free(struct NlBox *b);

/**
 * # Safety
 * `b` must be a live box handle; `out` must be valid for writes.
 */
enum NlStatus nl_box_party_count(const struct NlBox *b, size_t *out);

/**
 * `P(a|x)` as a rational string; bit `i-1` of `x` and `a` belongs to party `i`.
 *
 * # Safety
 * `b` must be a live box handle; `out` must be valid for writes.
 */
enum NlStatus nl_box_probability_str(const struct NlBox *b, uint32_t x, uint32_t a, char **out);

/**
 * # Safety
 * `b` must be a live box handle; `out` must be valid for writes.
 */
enum NlStatus nl_box_is_non_signaling(const struct NlBox *b, bool *out);

/**
 * Exact locality test; boxes with more than five parties fail with
 * `NL_STATUS_SIZE_LIMIT`.
 *
 * # Safety
 * `b` must be a live box handle; `out` must be valid for writes.
 */
enum NlStatus nl_box_is_local(const struct NlBox *b, bool *out);

/**
 * Exact equality of two boxes.
 *
 * # Safety
 * `p` and `q` must be live box handles; `out` must be valid for writes.
 */
enum NlStatus nl_box_equal(const struct NlBox *p, const struct NlBox *q, bool *out);

/**
 * Wires two boxes with the triangle wiring, which maps two correlated
 * boxes with parameter `eps` to one with the distillation map applied.
 *
 * # Safety
 * `p` and `q` must be live box handles; `out` must be valid for writes.
 */
enum NlStatus nl_compose_triangle(const struct NlBox *p, const struct NlBox *q, struct NlBox **out);

/**
 * Parses an expression such as `"x1*x2 + x3 + 1"` over `n` variables.
 *
 * # Safety
 * `expr` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum NlStatus nl_anf_parse(const char *expr, size_t n, struct NlAnf **out);

/**
 * Releases a function. Null is ignored.
 *
 * # Safety
 * `f` must be null or a function handle not yet freed.
 */
void nl_anf_free(struct NlAnf *f);

/**
 * `f(x)`, with bit `i-1` of `x` holding `x_i`.
 *
 * # Safety
 * `f` must be a live function handle; `out` must be valid for writes.
 */
enum NlStatus nl_anf_evaluate(const struct NlAnf *f, uint32_t x, bool *out);

/**
 * Channels needed to simulate `P^f` from scratch.
 *
 * # Safety
 * `f` must be a live function handle; `out` must be valid for writes.
 */
enum NlStatus nl_anf_n_scratch(const struct NlAnf *f, size_t *out);

/**
 * Channel bound for simulating `P^f` with a distilled box; fails with
 * `NL_STATUS_PRECONDITION` unless the non-local support is one block.
 *
 * # Safety
 * `f` must be a live function handle; `out` must be valid for writes.
 */
enum NlStatus nl_anf_n_distill_bound(const struct NlAnf *f, size_t *out);

/**
 * # Safety
 * `f` must be a live function handle; `out` must be valid for writes.
 */
enum NlStatus nl_anf_amplifiable(const struct NlAnf *f, bool *out);

/**
 * The full analysis report, as printed by `nonlocal analyze`.
 *
 * # Safety
 * `f` must be a live function handle; `out` must be valid for writes.
 */
enum NlStatus nl_anf_report(const struct NlAnf *f, char **out);

/**
 * One application of the n-party distillation map, as a rational string.
 *
 * # Safety
 * `eps` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum NlStatus nl_t_map(size_t n, const char *eps, char **out);

/**
 * The distillation trajectory as CSV, as written by `nonlocal distill`.
 *
 * # Safety
 * `eps` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum NlStatus nl_distill_csv(size_t n,
                             const char *eps,
                             size_t steps,
                             bool with_distance,
                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NONLOCAL_H */
