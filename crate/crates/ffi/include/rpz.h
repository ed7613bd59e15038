#ifndef RPZ_H
#define RPZ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; 0 is success.
typedef enum {
  RPZ_STATUS_OK = 0,
  RPZ_STATUS_NULL_POINTER = 1,
  RPZ_STATUS_INVALID_INPUT = 2,
  RPZ_STATUS_DOMAIN = 3,
  RPZ_STATUS_MAGNITUDE_OUT_OF_RANGE = 4,
  RPZ_STATUS_DEGREE_TOO_SMALL = 5,
  RPZ_STATUS_NUMERICAL = 6,
  RPZ_STATUS_IO = 7,
  RPZ_STATUS_JSON = 8,
  RPZ_STATUS_BUFFER_TOO_SMALL = 9,
  RPZ_STATUS_PANIC = 10,
} RpzStatus;

// Phase of the zero process near the unit circle.
typedef enum {
  RPZ_PHASE_LIQUID = 0,
  RPZ_PHASE_WEAK_CRYSTALLINE = 1,
  RPZ_PHASE_STRONG_CRYSTALLINE = 2,
} RpzPhase;

// A finished Monte Carlo run.
typedef struct RpzExperiment RpzExperiment;

// A coefficient profile `b(k) = sigma k^alpha l(k)`.
typedef struct RpzProfile RpzProfile;

// Scaling window `z = r_n exp(u / n + i psi)`.
typedef struct RpzWindow RpzWindow;

// Zeros of one sampled polynomial.
typedef struct RpzZeroSet RpzZeroSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rpz_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to fit).
// Returns the full message length without the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t rpz_last_error(char *buf, size_t len);

// Parses a profile literal such as `alpha=-2,slow=const:1,sigma=1`.
//
// # Safety
// `literal` must be a NUL-terminated string; `out` must be writable.
RpzStatus rpz_profile_parse(const char *literal, RpzProfile **out);

// # Safety
// `p` must come from [`rpz_profile_parse`] and not be used afterwards.
void rpz_profile_free(RpzProfile *p);

// # Safety
// `p` must be a live profile handle; `out` must be writable.
RpzStatus rpz_profile_phase(const RpzProfile *p, RpzPhase *out);

// Builds the scaling window at degree `n` and angle `psi` in `[0, 2 pi)`.
//
// # Safety
// `p` must be a live profile handle; `out` must be writable.
RpzStatus rpz_window_new(const RpzProfile *p, size_t n, double psi, RpzWindow **out);

// # Safety
// `w` must come from [`rpz_window_new`] and not be used afterwards.
void rpz_window_free(RpzWindow *w);

// Radius `r_n`, normalizer `c_n` and the Lambert-W quantity `a_n`; any out pointer may be null.
//
// # Safety
// `w` must be a live window handle.
RpzStatus rpz_window_params(const RpzWindow *w,
                            double *radius,
                            double *normalizer,
                            double *a_value);

// Maps window coordinates `u` to `z`.
//
// # Safety
// `w` must be a live window handle; both out pointers must be writable.
RpzStatus rpz_window_to_z(const RpzWindow *w, double u_re, double u_im, double *z_re, double *z_im);

// Maps `z` back to window coordinates.
//
// # Safety
// `w` must be a live window handle; both out pointers must be writable.
RpzStatus rpz_window_to_u(const RpzWindow *w, double z_re, double z_im, double *u_re, double *u_im);

// Samples `P_n` with coefficient law `law` (e.g. `icn:1`, `rademacher`) and computes its zeros.
//
// # Safety
// `p` must be a live profile handle, `law` a NUL-terminated string, `out` writable.
RpzStatus rpz_sample_zeros(const RpzProfile *p,
                           const char *law,
                           size_t n,
                           uint64_t master_seed,
                           uint64_t stream,
                           RpzZeroSet **out);

// # Safety
// `z` must come from [`rpz_sample_zeros`] and not be used afterwards.
void rpz_zero_set_free(RpzZeroSet *z);

// Number of zeros, or 0 for a null handle.
//
// # Safety
// `z` must be null or a live zero-set handle.
size_t rpz_zero_set_len(const RpzZeroSet *z);

// Copies up to `len` zeros into `re` and `im`; `written` receives the count.
//
// # Safety
// `z` must be a live handle; `re` and `im` must hold `len` doubles.
RpzStatus rpz_zero_set_copy(const RpzZeroSet *z,
                            double *re,
                            double *im,
                            size_t len,
                            size_t *written);

// Whether every zero met the residual bound.
//
// # Safety
// `z` must be a live handle; `out` writable.
RpzStatus rpz_zero_set_converged(const RpzZeroSet *z, bool *out);

// Zero intensity of the liquid limit at window coordinate `s`, `alpha > -1/2`.
//
// # Safety
// `out` must be writable.
RpzStatus rpz_rho1(double alpha, double s, double *out);

// Exact expected fraction of zeros of the self-inversive `K_m` on the unit circle.
//
// # Safety
// `p` must be a live profile handle; `out` writable.
RpzStatus rpz_si_fraction(const RpzProfile *p, size_t m, double *out);

// Runs an experiment from its JSON config on `threads` workers (0 = all cores).
//
// # Safety
// `config_json` must be a NUL-terminated string; `out` writable.
RpzStatus rpz_experiment_run(const char *config_json, size_t threads, RpzExperiment **out);

// # Safety
// `e` must come from [`rpz_experiment_run`] and not be used afterwards.
void rpz_experiment_free(RpzExperiment *e);

// Summary JSON, owned by the handle and valid until it is freed; null for a null handle.
//
// # Safety
// `e` must be null or a live experiment handle.
const char *rpz_experiment_summary(const RpzExperiment *e);

// Mean, standard error and z-score of the named statistic; `z` is NaN when there is no theory value.
//
// # Safety
// `e` must be a live handle, `name` a NUL-terminated string; out pointers may be null.
RpzStatus rpz_experiment_statistic(const RpzExperiment *e,
                                   const char *name,
                                   double *mean,
                                   double *se,
                                   double *z);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RPZ_H */
