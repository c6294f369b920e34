#ifndef BALLSERIES_H
#define BALLSERIES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_ARGUMENT = 2,
  BS_STATUS_DIMENSION_MISMATCH = 3,
  BS_STATUS_OUTSIDE_BALL = 4,
  BS_STATUS_NOT_IN_GROUP = 5,
  BS_STATUS_NUMERICAL = 6,
  BS_STATUS_CONVERGENCE = 7,
  BS_STATUS_TRUNCATION_OVERFLOW = 8,
  BS_STATUS_REPRESENTATION = 9,
  BS_STATUS_PRECONDITION = 10,
  BS_STATUS_CONFIG = 11,
  BS_STATUS_PANIC = 12,
} BsStatus;

typedef struct BsAutomorphism BsAutomorphism;

typedef struct BsPoint BsPoint;

typedef struct BsTruncation BsTruncation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *bs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bs_version(void);

// Creates a point of `B^n` from `n` real and `n` imaginary parts.
//
// # Safety
// `re` and `im` must point to `n` doubles; `out` must be writable.
enum BsStatus bs_point_new(const double *re, const double *im, size_t n, struct BsPoint **out);

// # Safety
// `p` must come from this library or be null.
void bs_point_free(struct BsPoint *p);

// Complex dimension, 0 for a null handle.
//
// # Safety
// `p` must be a live handle or null.
size_t bs_point_dim(const struct BsPoint *p);

// Copies the coordinates into `re` and `im`, each of length `n`.
//
// # Safety
// `p` must be a live handle; `re` and `im` must hold `n` doubles.
enum BsStatus bs_point_coords(const struct BsPoint *p, double *re, double *im, size_t n);

// `<z, w> = sum z_j conj(w_j) - 1`.
//
// # Safety
// Handles must be live; outputs writable.
enum BsStatus bs_pairing(const struct BsPoint *z,
                         const struct BsPoint *w,
                         double *out_re,
                         double *out_im);

// `K(z, w)^k`.
//
// # Safety
// Handles must be live; outputs writable.
enum BsStatus bs_kernel_power(const struct BsPoint *z,
                              const struct BsPoint *w,
                              uint32_t k,
                              double *out_re,
                              double *out_im);

// Bergman distance.
//
// # Safety
// Handles must be live; `out` writable.
enum BsStatus bs_distance(const struct BsPoint *z, const struct BsPoint *w, double *out);

// Automorphism of `B^n` from an `(n+1) x (n+1)` row-major matrix in `SU(n,1)`.
//
// # Safety
// `re` and `im` must hold `(n+1)^2` doubles; `out` writable.
enum BsStatus bs_automorphism_from_matrix(const double *re,
                                          const double *im,
                                          size_t n,
                                          struct BsAutomorphism **out);

// Boost of `B^1` taking 0 to `a`.
//
// # Safety
// `out` writable.
enum BsStatus bs_automorphism_translation(double a_re, double a_im, struct BsAutomorphism **out);

// Rotation `z -> e^{i theta} z` of `B^1`.
//
// # Safety
// `out` writable.
enum BsStatus bs_automorphism_rotation(double theta, struct BsAutomorphism **out);

// Rotation by `theta` about `fix` in `B^1`.
//
// # Safety
// `out` writable.
enum BsStatus bs_automorphism_elliptic(double fix_re,
                                       double fix_im,
                                       double theta,
                                       struct BsAutomorphism **out);

// `a . b`, acting as `b` first.
//
// # Safety
// Handles must be live; `out` writable.
enum BsStatus bs_automorphism_compose(const struct BsAutomorphism *a,
                                      const struct BsAutomorphism *b,
                                      struct BsAutomorphism **out);

// # Safety
// Handle must be live; `out` writable.
enum BsStatus bs_automorphism_inverse(const struct BsAutomorphism *g, struct BsAutomorphism **out);

// # Safety
// `g` must come from this library or be null.
void bs_automorphism_free(struct BsAutomorphism *g);

// `gamma(z)` as a new point handle.
//
// # Safety
// Handles must be live; `out` writable.
enum BsStatus bs_automorphism_apply(const struct BsAutomorphism *g,
                                    const struct BsPoint *z,
                                    struct BsPoint **out);

// Complex Jacobian determinant `J(gamma, z)`.
//
// # Safety
// Handles must be live; outputs writable.
enum BsStatus bs_automorphism_jacobian(const struct BsAutomorphism *g,
                                       const struct BsPoint *z,
                                       double *out_re,
                                       double *out_im);

// `c(B^n, k)` and its natural log.
//
// # Safety
// Outputs writable; `out_value` may be null.
enum BsStatus bs_c_ball(size_t n, uint32_t k, double *out_value, double *out_log);

// `I_1(k)` for a worked example (`segment`, `circle`, `disc`,
// `segment_disc`, `cr_ball`); pass NaN for `beta` when unused.
//
// # Safety
// `example` must be a NUL-terminated string; outputs writable.
enum BsStatus bs_example_i1(const char *example,
                            size_t n,
                            double alpha,
                            double beta,
                            uint32_t k,
                            double rel_tol,
                            double *out_value,
                            double *out_rel_err);

// Enumerates a group (built-in name or JSON file) up to word length `radius`.
//
// # Safety
// `group` must be a NUL-terminated string; `out` writable.
enum BsStatus bs_truncation_new(const char *group,
                                size_t radius,
                                size_t cap,
                                struct BsTruncation **out);

// Number of elements, 0 for a null handle.
//
// # Safety
// `t` must be a live handle or null.
size_t bs_truncation_len(const struct BsTruncation *t);

// # Safety
// `t` must come from this library or be null.
void bs_truncation_free(struct BsTruncation *t);

// Truncated scalar Poincare series `sum (K(gamma z, p) J(gamma, z))^k`.
//
// # Safety
// Handles must be live; outputs writable.
enum BsStatus bs_theta_scalar(const struct BsTruncation *t,
                              const struct BsPoint *p,
                              const struct BsPoint *z,
                              uint32_t k,
                              double *out_re,
                              double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BALLSERIES_H */
