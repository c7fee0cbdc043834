#ifndef NLS_H
#define NLS_H

#include <stddef.h>
#include <stdint.h>

typedef enum NlsBoundary {
  NLS_BOUNDARY_PERIODIC = 0,
  NLS_BOUNDARY_DIRICHLET = 1,
} NlsBoundary;

// How a run ended. `Running` while steps remain.
typedef enum NlsRunState {
  NLS_RUN_STATE_RUNNING = 0,
  NLS_RUN_STATE_COMPLETED = 1,
  NLS_RUN_STATE_AMPLITUDE_STOP = 2,
  NLS_RUN_STATE_SOLVER_FAILURE = 3,
  NLS_RUN_STATE_NON_FINITE = 4,
} NlsRunState;

// Result codes. Zero is success.
typedef enum NlsStatus {
  NLS_STATUS_OK = 0,
  NLS_STATUS_NULL_POINTER = 1,
  NLS_STATUS_INVALID_ARGUMENT = 2,
  // The fixed-point iteration did not converge.
  NLS_STATUS_FIXED_POINT_FAILURE = 3,
  NLS_STATUS_UNSUPPORTED = 4,
  // A root search or linear solve failed.
  NLS_STATUS_NUMERICAL_FAILURE = 5,
  NLS_STATUS_BUFFER_TOO_SMALL = 6,
  // A Rust panic was caught at the boundary.
  NLS_STATUS_PANIC = 7,
} NlsStatus;

// Opaque simulation handle.
typedef struct NlsSimulation NlsSimulation;

// Run parameters. Start from [`nls_params_default`].
typedef struct NlsParams {
  double a;
  double b;
  uintptr_t n_cells;
  enum NlsBoundary boundary;
  double lambda;
  // 1 cubic, 2 quintic, any other `p >= 1` for `|u|^(2p)`.
  uint32_t power;
  double tau;
  double t_end;
  double delta;
  uintptr_t max_iters;
  // Stop once `max|u|` exceeds this multiple of `max|u^0|`.
  double amplitude_stop_factor;
} NlsParams;

// Exact solution callback used for the startup values: writes `u(x, t)`.
typedef void (*NlsSampler)(double x, double t, void *user_data, double *re, double *im);

// Per-step diagnostics, mirroring the CSV columns of `nls solve`.
typedef struct NlsRecord {
  uintptr_t step;
  double t;
  double mass_r;
  double energy_r;
  double mass_u;
  double energy_u;
  double linf_u;
  uintptr_t fp_iters;
} NlsRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call into this library from the same thread.
const char *nls_last_error_message(void);

// Static version string.
const char *nls_version(void);

struct NlsParams nls_params_default(void);

// Number of time levels `k` in the scheme, and its `β_0 .. β_{k-1}` when
// `beta` is non-null (`cap` entries available).
//
// # Safety
// `scheme` must be a NUL-terminated string; `beta`, if non-null, must point
// to `cap` writable doubles; `k_out` must be valid.
enum NlsStatus nls_scheme_beta(const char *scheme, double *beta, uintptr_t cap, uintptr_t *k_out);

// Numerical frequency `ω̃` for the plane wave `exp(i(kx - ωt))`.
//
// # Safety
// `scheme` must be a NUL-terminated string and `out` valid.
enum NlsStatus nls_dispersion_omega_tilde(const char *scheme,
                                          double k_wave,
                                          double lambda,
                                          double tau,
                                          double *out);

// Relative dispersion error `|ω - ω̃| / |ω|`.
//
// # Safety
// As for [`nls_dispersion_omega_tilde`].
enum NlsStatus nls_dispersion_error(const char *scheme,
                                    double k_wave,
                                    double lambda,
                                    double tau,
                                    double *out);

// Creates a simulation from nodal values of `u^0` (`len` must equal the
// number of unknowns: `n_cells` periodic, `n_cells - 1` Dirichlet).
//
// With `sampler` null, multistep schemes start from a cascade of
// Crank-Nicolson steps. Otherwise the startup values are sampled from it.
//
// # Safety
// `scheme` must be NUL-terminated, `params`, `re`, `im` and `out` valid, and
// `re`/`im` must hold `len` doubles each.
enum NlsStatus nls_simulation_new(const char *scheme,
                                  const struct NlsParams *params,
                                  const double *re,
                                  const double *im,
                                  uintptr_t len,
                                  NlsSampler sampler,
                                  void *user_data,
                                  struct NlsSimulation **out);

// Releases a simulation. Null is ignored.
//
// # Safety
// `sim` must come from [`nls_simulation_new`] and not be used afterwards.
void nls_simulation_free(struct NlsSimulation *sim);

// Advances one step. `state` receives the run state afterwards; a run
// that ended with `SolverFailure` still returns `Ok` here.
//
// # Safety
// `sim` must be a live handle, `state` valid or null.
enum NlsStatus nls_simulation_step(struct NlsSimulation *sim, enum NlsRunState *state);

// Steps until the run ends.
//
// # Safety
// As for [`nls_simulation_step`].
enum NlsStatus nls_simulation_run(struct NlsSimulation *sim, enum NlsRunState *state);

// Current time level `n` and time `n τ`.
//
// # Safety
// `sim` must be a live handle; outputs valid or null.
enum NlsStatus nls_simulation_time(struct NlsSimulation *sim, uintptr_t *step, double *t);

// Number of grid unknowns.
//
// # Safety
// `sim` must be a live handle, `len` valid.
enum NlsStatus nls_simulation_len(struct NlsSimulation *sim, uintptr_t *len);

// Copies the newest `u^n`.
//
// # Safety
// `sim` must be a live handle; `re`, `im` must hold `cap` doubles.
enum NlsStatus nls_simulation_get_u(struct NlsSimulation *sim,
                                    double *re,
                                    double *im,
                                    uintptr_t cap);

// Copies the newest `R^n`.
//
// # Safety
// As for [`nls_simulation_get_u`].
enum NlsStatus nls_simulation_get_r(struct NlsSimulation *sim,
                                    double *re,
                                    double *im,
                                    uintptr_t cap);

// Diagnostics of the newest time level (the startup state before any
// step has been taken).
//
// # Safety
// `sim` must be a live handle, `out` valid.
enum NlsStatus nls_simulation_record(struct NlsSimulation *sim, struct NlsRecord *out);

// Run state without stepping.
//
// # Safety
// `sim` must be a live handle, `state` valid.
enum NlsStatus nls_simulation_state(struct NlsSimulation *sim, enum NlsRunState *state);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLS_H */
