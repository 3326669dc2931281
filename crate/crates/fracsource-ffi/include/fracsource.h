#ifndef FRACSOURCE_H
#define FRACSOURCE_H

/* Generated by cbindgen from the fracsource-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Per-point noise level policy under the bound v_max.
typedef enum FsSigmaMode {
  // sigma_k = v_max / 2 for every point.
  FS_SIGMA_MODE_CONSTANT = 0,
  // sigma_k drawn uniformly from [0, v_max) per point.
  FS_SIGMA_MODE_UNIFORM = 1,
} FsSigmaMode;

// Result of every call. Values above `FS_STATUS_OK` are failures; the
// thread-local message explains the most recent one.
typedef enum FsStatus {
  FS_STATUS_OK = 0,
  // A mathematical parameter is outside the supported domain.
  FS_STATUS_DOMAIN = 1,
  // A structural precondition is violated (sizes, ordering, ranges).
  FS_STATUS_INVALID_ARGUMENT = 2,
  // Configuration input is malformed.
  FS_STATUS_CONFIG = 3,
  // A numerical method could not reach its tolerance.
  FS_STATUS_NUMERICAL = 4,
  // An I/O operation failed.
  FS_STATUS_IO = 5,
  // A required pointer argument is null.
  FS_STATUS_NULL_POINTER = 6,
  // A panic was caught at the boundary.
  FS_STATUS_PANIC = 7,
} FsStatus;

// Normalization of the reconstructed zero mode.
typedef enum FsZeroMode {
  // Orthonormal-basis normalization (divide by b_0).
  FS_ZERO_MODE_CONSISTENT = 0,
  // Display-form normalization (divide by Gamma(alpha) b_0).
  FS_ZERO_MODE_LITERAL = 1,
} FsZeroMode;

// Cosine coefficients c_0..=c_P.
typedef struct FsCoefficients FsCoefficients;

// A truncated reconstruction with its provenance.
typedef struct FsEstimate FsEstimate;

// One realized data set on a midpoint grid.
typedef struct FsObservations FsObservations;

// A validated problem instance (order, horizon, time factor).
typedef struct FsProblem FsProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the most recent error message into `buf` (NUL-terminated,
// truncating to `cap`) and return the byte length the full message needs
// including the NUL. With a null `buf` or zero `cap` nothing is copied,
// so the return value can size an exact buffer first.
//
// # Safety
// `buf`, if non-null, must be writable for `cap` bytes.
size_t fs_last_error_message(char *buf, size_t cap);

// E_{alpha,beta}(z) for alpha in (0,1], beta in (0,2], z <= 0.
//
// # Safety
// `out`, if non-null, must be valid for one write.
enum FsStatus fs_mlf(double alpha, double beta, double z, double *out);

// E_{alpha,1}(-x) for x >= 0.
//
// # Safety
// `out`, if non-null, must be valid for one write.
enum FsStatus fs_mlf_one(double alpha, double x, double *out);

// Truncation rule M = max(1, floor(n^{1/(5+2 beta)})) clamped to n-1.
//
// # Safety
// `out`, if non-null, must be valid for one write.
enum FsStatus fs_choose_m(size_t n, double beta, size_t *out);

// Problem with the constant time factor R(t) = value.
//
// # Safety
// `out`, if non-null, must be valid for one pointer write.
enum FsStatus fs_problem_new_constant(double alpha,
                                      double t_final,
                                      double value,
                                      struct FsProblem **out);

// Problem with the time factor R(t) = offset + amplitude sin t.
//
// # Safety
// `out`, if non-null, must be valid for one pointer write.
enum FsStatus fs_problem_new_offset_sine(double alpha,
                                         double t_final,
                                         double offset,
                                         double amplitude,
                                         struct FsProblem **out);

// # Safety
// `problem` must be null or an unfreed handle from a problem constructor;
// it must not be used after this call.
void fs_problem_free(struct FsProblem *problem);

// Kernel value b_p of the forward map.
//
// # Safety
// `problem`, if non-null, must be a live handle; `out`, if non-null,
// must be valid for one write.
enum FsStatus fs_kernel(const struct FsProblem *problem, size_t p, double *out);

// Coefficient vector c_0..=c_{len-1}; `values` must hold `len` finite
// doubles.
//
// # Safety
// `values`, if non-null, must be readable for `len` doubles; `out`, if
// non-null, must be valid for one pointer write.
enum FsStatus fs_coefficients_new(const double *values, size_t len, struct FsCoefficients **out);

// Number of stored coefficients (bandlimit plus one).
//
// # Safety
// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
// must be valid for one write.
enum FsStatus fs_coefficients_len(const struct FsCoefficients *coeffs, size_t *out);

// c_p, with modes beyond the bandlimit reading as zero.
//
// # Safety
// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
// must be valid for one write.
enum FsStatus fs_coefficients_get(const struct FsCoefficients *coeffs, size_t p, double *out);

// Pointwise synthesis sum_p c_p phi_p(x).
//
// # Safety
// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
// must be valid for one write.
enum FsStatus fs_synthesize(const struct FsCoefficients *coeffs, double x, double *out);

// Squared Sobolev norm sum_p p^{2 beta} c_p^2 (zero mode excluded).
//
// # Safety
// `coeffs`, if non-null, must be a live handle; `out`, if non-null,
// must be valid for one write.
enum FsStatus fs_sobolev_norm_sq(const struct FsCoefficients *coeffs, double beta, double *out);

// # Safety
// `coeffs` must be null or an unfreed handle from [`fs_coefficients_new`]
// or [`fs_forward_map`]; it must not be used after this call.
void fs_coefficients_free(struct FsCoefficients *coeffs);

// Coefficients of u(., T) for the source f: u_p = b_p f_p.
//
// # Safety
// `problem` and `f`, if non-null, must be live handles; `out`, if
// non-null, must be valid for one pointer write.
enum FsStatus fs_forward_map(const struct FsProblem *problem,
                             const struct FsCoefficients *f,
                             struct FsCoefficients **out);

// Noisy samples of u(., T) on the n-point midpoint grid.
//
// # Safety
// `problem` and `f`, if non-null, must be live handles; `out`, if
// non-null, must be valid for one pointer write.
enum FsStatus fs_observe(const struct FsProblem *problem,
                         const struct FsCoefficients *f,
                         size_t n,
                         double v_max,
                         enum FsSigmaMode sigma_mode,
                         uint64_t seed,
                         struct FsObservations **out);

// Number of observed points.
//
// # Safety
// `obs`, if non-null, must be a live handle; `out`, if non-null, must be
// valid for one write.
enum FsStatus fs_observations_len(const struct FsObservations *obs, size_t *out);

// u~_T(x_k) for k < len.
//
// # Safety
// `obs`, if non-null, must be a live handle; `out`, if non-null, must be
// valid for one write.
enum FsStatus fs_observations_value(const struct FsObservations *obs, size_t k, double *out);

// sigma_k for k < len.
//
// # Safety
// `obs`, if non-null, must be a live handle; `out`, if non-null, must be
// valid for one write.
enum FsStatus fs_observations_sigma(const struct FsObservations *obs, size_t k, double *out);

// # Safety
// `obs` must be null or an unfreed handle from [`fs_observe`]; it must
// not be used after this call.
void fs_observations_free(struct FsObservations *obs);

// Truncated reconstruction of the source from one observation set.
//
// # Safety
// `obs` and `problem`, if non-null, must be live handles; `out`, if
// non-null, must be valid for one pointer write.
enum FsStatus fs_estimate(const struct FsObservations *obs,
                          const struct FsProblem *problem,
                          size_t m,
                          enum FsZeroMode zero_mode,
                          struct FsEstimate **out);

// Truncation level M of the reconstruction.
//
// # Safety
// `est`, if non-null, must be a live handle; `out`, if non-null, must be
// valid for one write.
enum FsStatus fs_estimate_truncation(const struct FsEstimate *est, size_t *out);

// Number of samples the reconstruction was built from.
//
// # Safety
// `est`, if non-null, must be a live handle; `out`, if non-null, must be
// valid for one write.
enum FsStatus fs_estimate_sample_count(const struct FsEstimate *est, size_t *out);

// Reconstructed coefficient c~_p for p <= M.
//
// # Safety
// `est`, if non-null, must be a live handle; `out`, if non-null, must be
// valid for one write.
enum FsStatus fs_estimate_coefficient(const struct FsEstimate *est, size_t p, double *out);

// # Safety
// `est` must be null or an unfreed handle from [`fs_estimate`]; it must
// not be used after this call.
void fs_estimate_free(struct FsEstimate *est);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FRACSOURCE_H */
