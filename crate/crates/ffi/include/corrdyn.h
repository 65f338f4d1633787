#ifndef CORRDYN_H
#define CORRDYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_UTF8 = 2,
  CD_STATUS_PARSE_ERROR = 3,
  CD_STATUS_INVALID_INPUT = 4,
  CD_STATUS_NOT_CERTIFIED = 5,
  CD_STATUS_NO_ESCAPE = 6,
  CD_STATUS_BUDGET_EXCEEDED = 7,
  CD_STATUS_NUMERICAL = 8,
  CD_STATUS_BUFFER_TOO_SMALL = 9,
  CD_STATUS_PANIC = 10,
} CdStatus;

/**
 * Opaque handle to a correspondence.
 */
typedef struct CdCorrespondence CdCorrespondence;

/**
 * Opaque handle to a differential operator.
 */
typedef struct CdOperator CdOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *cd_last_error(void);

/**
 * Parses a curve literal such as `"w^2 - z"`.
 */
enum CdStatus cd_correspondence_parse(const char *curve, struct CdCorrespondence **out);

/**
 * Builds the correspondence of a family given as
 * `{"R0": "...", "P": [...], "beta": [[re, im], ...]}`.
 */
enum CdStatus cd_correspondence_from_family_json(const char *json, struct CdCorrespondence **out);

void cd_correspondence_free(struct CdCorrespondence *handle);

/**
 * Fiber `F(z)`. Finite roots, repeated by multiplicity and sorted by
 * `(re, im)`, go to `out_re_im` as `2 * out_len` doubles; `capacity` counts
 * roots. Returns `BUFFER_TOO_SMALL` with `out_len` set to the number needed
 * when the buffer is short. `out_infinite` receives the multiplicity of
 * infinity.
 */
enum CdStatus cd_fiber(const struct CdCorrespondence *handle,
                       double re,
                       double im,
                       double *out_re_im,
                       size_t capacity,
                       size_t *out_len,
                       size_t *out_infinite);

/**
 * Parses an operator literal such as `"(w^2-1)*D^2 + D"` or its JSON form.
 */
enum CdStatus cd_operator_parse(const char *src, struct CdOperator **out);

void cd_operator_free(struct CdOperator *handle);

/**
 * The degree-`n` correspondence `T_n` of an operator.
 */
enum CdStatus cd_operator_build_tn(const struct CdOperator *op,
                                   uint64_t n,
                                   struct CdCorrespondence **out);

/**
 * Certificate of `T_n` as JSON. A failing certificate is still `OK`; read
 * its `pass` field.
 */
enum CdStatus cd_certify_operator_json(const struct CdOperator *op,
                                       uint64_t n,
                                       size_t samples_per_disk,
                                       char **out_json);

/**
 * Normalized depth-`m` pushforward of the Dirac mass at `(re, im)`.
 */
enum CdStatus cd_exact_pushforward_json(const struct CdCorrespondence *handle,
                                        double re,
                                        double im,
                                        size_t m,
                                        double prune_tol,
                                        size_t budget,
                                        char **out_json);

/**
 * Monte-Carlo estimate of the equidistribution measure.
 */
enum CdStatus cd_sample_orbit_json(const struct CdCorrespondence *handle,
                                   double re,
                                   double im,
                                   size_t burn_in,
                                   size_t samples,
                                   uint64_t seed,
                                   char **out_json);

/**
 * Minimal invariant set of `T_n` at resolution `eps` as JSON.
 */
enum CdStatus cd_min_invariant_set_json(const struct CdOperator *op,
                                        uint64_t n,
                                        double eps,
                                        size_t max_atoms,
                                        char **out_json);

/**
 * Releases a string returned by this library.
 */
void cd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORRDYN_H */
