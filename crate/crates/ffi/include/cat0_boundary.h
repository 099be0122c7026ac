#ifndef CAT0_BOUNDARY_H
#define CAT0_BOUNDARY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_POINTER = 1,
  CB_STATUS_INVALID_UTF8 = 2,
  CB_STATUS_PARSE = 3,
  CB_STATUS_EMPTY_PERIOD = 4,
  CB_STATUS_OUT_OF_RANGE = 5,
  CB_STATUS_NO_LIMIT = 6,
  CB_STATUS_UNSUPPORTED_SPEC = 7,
  CB_STATUS_INVALID_CONSTANTS = 8,
  CB_STATUS_NOT_CONVERGENT = 9,
  CB_STATUS_NOT_CAUCHY = 10,
  CB_STATUS_NO_COVER = 11,
  CB_STATUS_CROSSCHECK_MISMATCH = 12,
  CB_STATUS_PROBE_FAILURE = 13,
  CB_STATUS_CONFIG = 14,
  CB_STATUS_IO = 15,
  CB_STATUS_PANIC = 16,
} CbStatus;

// An action of F2 x Z on T x R.
typedef struct CbSpec CbSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// A preset action: `dot`, `star` or `scaled2`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum CbStatus cb_spec_preset(const char *name, struct CbSpec **out);

// The action with `psi(a) = weight_a`, `psi(b) = weight_b` and central shift `z_shift`,
// each a rational such as `"1/2"`.
//
// # Safety
// All strings must be NUL-terminated and `out` a valid pointer.
enum CbStatus cb_spec_new(const char *weight_a,
                          const char *weight_b,
                          const char *z_shift,
                          struct CbSpec **out);

// # Safety
// `spec` must come from `cb_spec_preset` or `cb_spec_new` and not be freed twice.
void cb_spec_free(struct CbSpec *spec);

// The boundary limit of `g^n x0`, for `g` written as `"word:z"`.
//
// # Safety
// `spec` must be a live handle, `element` NUL-terminated, `out` valid.
enum CbStatus cb_orbit_limit(const struct CbSpec *spec, const char *element, char **out);

// Condition (*) on `ball(l)` with radii `n`, `m`. Writes the verdict to `holds` and, when
// `out_json` is not null, the full verdict as JSON.
//
// # Safety
// Handles must be live, strings NUL-terminated, `holds` valid; `out_json` may be null.
enum CbStatus cb_check_star(const struct CbSpec *spec_x,
                            const struct CbSpec *spec_y,
                            const char *n,
                            const char *m,
                            uint32_t l,
                            bool *holds,
                            char **out_json);

// The square of the smallest `M` for which (*) holds on `ball(l)`, as `"p/q"`.
//
// # Safety
// Handles must be live, `n` NUL-terminated, `out` valid.
enum CbStatus cb_minimal_m_sq(const struct CbSpec *spec_x,
                              const struct CbSpec *spec_y,
                              const char *n,
                              uint32_t l,
                              char **out);

// The boundary map at `alpha` (for example `"[a^inf,0/1]"`), approximating with radius `n`
// and at least `k` sequence terms.
//
// # Safety
// Handles must be live, strings NUL-terminated, `out` valid.
enum CbStatus cb_phibar(const struct CbSpec *spec_x,
                        const struct CbSpec *spec_y,
                        const char *n,
                        const char *alpha,
                        uint32_t k,
                        char **out);

// Exact tree distance between two tree points, as `"p/q"`.
//
// # Safety
// Strings must be NUL-terminated and `out` valid.
enum CbStatus cb_tree_dist(const char *p, const char *q, char **out);

// # Safety
// `s` must come from this library and not be freed twice.
void cb_string_free(char *s);

// Message of the last failed call on this thread; empty after a success. Valid until the
// next call on the same thread.
const char *cb_last_error_message(void);

const char *cb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAT0_BOUNDARY_H */
