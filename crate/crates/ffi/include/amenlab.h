#ifndef AMENLAB_H
#define AMENLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum AmenStatus {
  AMEN_STATUS_OK = 0,
  AMEN_STATUS_NULL_POINTER = 1,
  AMEN_STATUS_INVALID_ARGUMENT = 2,
  AMEN_STATUS_NOT_PRIME = 3,
  AMEN_STATUS_PARSE = 4,
  AMEN_STATUS_PRECONDITION = 5,
  AMEN_STATUS_NUMERICAL = 6,
  AMEN_STATUS_TOO_LARGE = 7,
  AMEN_STATUS_IO = 8,
  AMEN_STATUS_PANIC = 9,
} AmenStatus;

typedef struct AmenMatrix AmenMatrix;

typedef struct AmenPlane AmenPlane;

typedef struct AmenReport AmenReport;

typedef struct AmenTensor AmenTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *amen_version(void);

// Message for the last failed call on this thread, or null. Valid until the next call; do not free.
const char *amen_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void amen_string_free(char *s);

// Projective plane over `F_l`.
//
// # Safety
// `out` must be a valid pointer.
enum AmenStatus amen_plane_new(uint64_t l, struct AmenPlane **out);

// # Safety
// `plane` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_plane_len(const struct AmenPlane *plane, size_t *out);

// Normalized representative of point `index` and whether it lies in the sign set.
//
// # Safety
// `plane` must be a live handle; `xyz` must point to three writable values; `in_sign_set` may be null.
enum AmenStatus amen_plane_point(const struct AmenPlane *plane,
                                 size_t index,
                                 uint64_t *xyz,
                                 bool *in_sign_set);

// # Safety
// `plane` must be null or a handle not yet freed.
void amen_plane_free(struct AmenPlane *plane);

// Row-major complex matrix; `im` may be null for a real matrix.
//
// # Safety
// `re` (and `im` when non-null) must hold `rows * cols` values; `out` must be valid.
enum AmenStatus amen_matrix_new(size_t rows,
                                size_t cols,
                                const double *re,
                                const double *im,
                                struct AmenMatrix **out);

// # Safety
// `m` must be a live handle; `rows` and `cols` valid pointers.
enum AmenStatus amen_matrix_shape(const struct AmenMatrix *m, size_t *rows, size_t *cols);

// # Safety
// `m` must be a live handle; `re` and `im` valid pointers.
enum AmenStatus amen_matrix_get(const struct AmenMatrix *m,
                                size_t row,
                                size_t col,
                                double *re,
                                double *im);

// Operator norm on `l_p`; pass `INFINITY` for `p = inf`. Exact only for `p` in `{1, 2, inf}`.
//
// # Safety
// `m` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_matrix_opnorm(const struct AmenMatrix *m, double p, double *out);

// Schatten norm of order 1 (trace) or 2 (Hilbert-Schmidt).
//
// # Safety
// `m` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_matrix_schatten(const struct AmenMatrix *m, uint32_t order, double *out);

// `U |T|^(1/2)` from the polar decomposition of `T`.
//
// # Safety
// `m` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_matrix_mazur(const struct AmenMatrix *m, struct AmenMatrix **out);

// `U |S|^2`, the inverse of [`amen_matrix_mazur`] on the sphere.
//
// # Safety
// `m` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_matrix_mazur_inverse(const struct AmenMatrix *m, struct AmenMatrix **out);

// # Safety
// `m` must be null or a handle not yet freed.
void amen_matrix_free(struct AmenMatrix *m);

// Parses a decomposition from JSON.
//
// # Safety
// `json` must be a nul-terminated string; `out` a valid pointer.
enum AmenStatus amen_tensor_from_json(const char *json, struct AmenTensor **out);

// Built-in candidate: `exact-diagonal`, `rank1`, `truncated`, `perturbed` or `orbit-sample`.
// `config_json` may be null for the defaults.
//
// # Safety
// `name` must be a nul-terminated string, `config_json` null or one; `out` a valid pointer.
enum AmenStatus amen_tensor_builtin(const char *name,
                                    const char *config_json,
                                    struct AmenTensor **out);

// Number of pairs.
//
// # Safety
// `t` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_tensor_rank(const struct AmenTensor *t, size_t *out);

// Largest entry of `sum a_i b_i - 1`.
//
// # Safety
// `t` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_tensor_prod_defect(const struct AmenTensor *t, double *out);

// JSON serialization; free with [`amen_string_free`].
//
// # Safety
// `t` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_tensor_to_json(const struct AmenTensor *t, char **out);

// Runs the rank-obstruction pipeline on the decomposition.
//
// # Safety
// `t` must be a live handle, `config_json` null or a nul-terminated string; `out` a valid pointer.
enum AmenStatus amen_tensor_run_pipeline(const struct AmenTensor *t,
                                         const char *config_json,
                                         struct AmenReport **out);

// # Safety
// `t` must be null or a handle not yet freed.
void amen_tensor_free(struct AmenTensor *t);

// Runs an experiment by subcommand name. `request_json` (may be null) is an object with an
// optional `config` plus the subcommand's arguments, e.g. `{"l": 3}` for `plane` or
// `{"graph": "petersen"}` for `spectral`.
//
// # Safety
// `name` must be a nul-terminated string, `request_json` null or one; `out` a valid pointer.
enum AmenStatus amen_run_experiment(const char *name,
                                    const char *request_json,
                                    struct AmenReport **out);

// Whether every assertion in the report held.
//
// # Safety
// `r` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_report_passed(const struct AmenReport *r, bool *out);

// Pretty JSON rendering; free with [`amen_string_free`].
//
// # Safety
// `r` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_report_json(const struct AmenReport *r, char **out);

// CSV rendering with its `#` header line; free with [`amen_string_free`].
//
// # Safety
// `r` must be a live handle; `out` a valid pointer.
enum AmenStatus amen_report_csv(const struct AmenReport *r, char **out);

// # Safety
// `r` must be null or a handle not yet freed.
void amen_report_free(struct AmenReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMENLAB_H */
