//! C ABI over `nls-core`.
//!
//! Every function returns an [`NlsStatus`]. On failure a message is kept per
//! thread and can be read with [`nls_last_error_message`]. Handles are opaque
//! and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nls_core::dispersion::{self, DispersionQuery};
use nls_core::stepper::StepOutcome;
use nls_core::{
    BoundaryCondition, Complex64, ComplexState, Grid1D, NlsError, Nonlinearity, NonlinearityFamily, SchemeKind,
    Simulation, SolverConfig, StartupMode, TerminalStatus,
};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The fixed-point iteration did not converge.
    FixedPointFailure = 3,
    Unsupported = 4,
    /// A root search or linear solve failed.
    NumericalFailure = 5,
    BufferTooSmall = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// How a run ended. `Running` while steps remain.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsRunState {
    Running = 0,
    Completed = 1,
    AmplitudeStop = 2,
    SolverFailure = 3,
    NonFinite = 4,
}

impl From<Option<TerminalStatus>> for NlsRunState {
    fn from(s: Option<TerminalStatus>) -> Self {
        match s {
            None => NlsRunState::Running,
            Some(TerminalStatus::Completed) => NlsRunState::Completed,
            Some(TerminalStatus::AmplitudeStop) => NlsRunState::AmplitudeStop,
            Some(TerminalStatus::SolverFailure) => NlsRunState::SolverFailure,
            Some(TerminalStatus::NonFinite) => NlsRunState::NonFinite,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsBoundary {
    Periodic = 0,
    Dirichlet = 1,
}

/// Exact solution callback used for the startup values: writes `u(x, t)`.
pub type NlsSampler = Option<extern "C" fn(x: f64, t: f64, user_data: *mut c_void, re: *mut f64, im: *mut f64)>;

/// Run parameters. Start from [`nls_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NlsParams {
    pub a: f64,
    pub b: f64,
    pub n_cells: usize,
    pub boundary: NlsBoundary,
    pub lambda: f64,
    /// 1 cubic, 2 quintic, any other `p >= 1` for `|u|^(2p)`.
    pub power: u32,
    pub tau: f64,
    pub t_end: f64,
    pub delta: f64,
    pub max_iters: usize,
    /// Stop once `max|u|` exceeds this multiple of `max|u^0|`.
    pub amplitude_stop_factor: f64,
}

/// Per-step diagnostics, mirroring the CSV columns of `nls solve`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NlsRecord {
    pub step: usize,
    pub t: f64,
    pub mass_r: f64,
    pub energy_r: f64,
    pub mass_u: f64,
    pub energy_u: f64,
    pub linf_u: f64,
    pub fp_iters: usize,
}

/// Opaque simulation handle.
pub struct NlsSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &NlsError) -> NlsStatus {
    match e {
        NlsError::FixedPoint(_) | NlsError::RunStopped { .. } => NlsStatus::FixedPointFailure,
        NlsError::Unsupported(_) => NlsStatus::Unsupported,
        NlsError::RootNotFound(_) | NlsError::SingularSystem { .. } => NlsStatus::NumericalFailure,
        _ => NlsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (NlsStatus, String)>) -> NlsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlsStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            NlsStatus::Panic
        }
    }
}

fn core(e: NlsError) -> (NlsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NlsStatus, String) {
    (NlsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn scheme_arg(name: *const c_char) -> Result<SchemeKind, (NlsStatus, String)> {
    if name.is_null() {
        return Err(null("scheme"));
    }
    let s = CStr::from_ptr(name)
        .to_str()
        .map_err(|_| (NlsStatus::InvalidArgument, "scheme is not UTF-8".to_string()))?;
    s.parse().map_err(|e| (NlsStatus::InvalidArgument, format!("{e}")))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn nls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn nls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn nls_params_default() -> NlsParams {
    let d = SolverConfig::new(0.01, 1.0);
    NlsParams {
        a: -20.0,
        b: 20.0,
        n_cells: 1000,
        boundary: NlsBoundary::Periodic,
        lambda: -2.0,
        power: 1,
        tau: d.tau,
        t_end: d.t_end,
        delta: d.delta,
        max_iters: d.max_iters,
        amplitude_stop_factor: d.amplitude_stop_factor,
    }
}

/// Number of time levels `k` in the scheme, and its `β_0 .. β_{k-1}` when
/// `beta` is non-null (`cap` entries available).
///
/// # Safety
/// `scheme` must be a NUL-terminated string; `beta`, if non-null, must point
/// to `cap` writable doubles; `k_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nls_scheme_beta(
    scheme: *const c_char,
    beta: *mut f64,
    cap: usize,
    k_out: *mut usize,
) -> NlsStatus {
    guard(|| {
        let kind = scheme_arg(scheme)?;
        if k_out.is_null() {
            return Err(null("k_out"));
        }
        let c = kind.coefficients().map_err(core)?;
        *k_out = c.k();
        if beta.is_null() {
            return Ok(());
        }
        if cap < c.k() {
            return Err((NlsStatus::BufferTooSmall, format!("need {} entries, got {cap}", c.k())));
        }
        std::slice::from_raw_parts_mut(beta, c.k()).copy_from_slice(c.beta());
        Ok(())
    })
}

/// Numerical frequency `ω̃` for the plane wave `exp(i(kx - ωt))`.
///
/// # Safety
/// `scheme` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nls_dispersion_omega_tilde(
    scheme: *const c_char,
    k_wave: f64,
    lambda: f64,
    tau: f64,
    out: *mut f64,
) -> NlsStatus {
    guard(|| {
        let kind = scheme_arg(scheme)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = DispersionQuery::new(kind, k_wave, lambda, tau).map_err(core)?;
        *out = dispersion::solve_omega_tilde(&q).map_err(core)?;
        Ok(())
    })
}

/// Relative dispersion error `|ω - ω̃| / |ω|`.
///
/// # Safety
/// As for [`nls_dispersion_omega_tilde`].
#[no_mangle]
pub unsafe extern "C" fn nls_dispersion_error(
    scheme: *const c_char,
    k_wave: f64,
    lambda: f64,
    tau: f64,
    out: *mut f64,
) -> NlsStatus {
    guard(|| {
        let kind = scheme_arg(scheme)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = DispersionQuery::new(kind, k_wave, lambda, tau).map_err(core)?;
        let wt = dispersion::solve_omega_tilde(&q).map_err(core)?;
        *out = dispersion::dispersion_error(q.omega(), wt).map_err(core)?;
        Ok(())
    })
}

struct CallbackSampler {
    f: extern "C" fn(f64, f64, *mut c_void, *mut f64, *mut f64),
    user_data: *mut c_void,
}

// The callback is only invoked from the thread that called
// `nls_simulation_new`, during that call.
unsafe impl Sync for CallbackSampler {}

impl CallbackSampler {
    fn eval(&self, x: f64, t: f64) -> Complex64 {
        let (mut re, mut im) = (f64::NAN, f64::NAN);
        (self.f)(x, t, self.user_data, &mut re, &mut im);
        Complex64::new(re, im)
    }
}

/// Creates a simulation from nodal values of `u^0` (`len` must equal the
/// number of unknowns: `n_cells` periodic, `n_cells - 1` Dirichlet).
///
/// With `sampler` null, multistep schemes start from a cascade of
/// Crank-Nicolson steps. Otherwise the startup values are sampled from it.
///
/// # Safety
/// `scheme` must be NUL-terminated, `params`, `re`, `im` and `out` valid, and
/// `re`/`im` must hold `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_new(
    scheme: *const c_char,
    params: *const NlsParams,
    re: *const f64,
    im: *const f64,
    len: usize,
    sampler: NlsSampler,
    user_data: *mut c_void,
    out: *mut *mut NlsSimulation,
) -> NlsStatus {
    guard(|| {
        let kind = scheme_arg(scheme)?;
        if params.is_null() {
            return Err(null("params"));
        }
        if re.is_null() || im.is_null() {
            return Err(null("initial data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let p = &*params;
        let bc = match p.boundary {
            NlsBoundary::Periodic => BoundaryCondition::Periodic,
            NlsBoundary::Dirichlet => BoundaryCondition::HomogeneousDirichlet,
        };
        let grid = Grid1D::new(p.a, p.b, p.n_cells, bc).map_err(core)?;
        if len != grid.len() {
            return Err(core(NlsError::LengthMismatch {
                expected: grid.len(),
                actual: len,
            }));
        }
        let family = match p.power {
            1 => NonlinearityFamily::Cubic,
            2 => NonlinearityFamily::Quintic,
            q => NonlinearityFamily::Power(q),
        };
        let nl = Nonlinearity::new(p.lambda, family).map_err(core)?;
        let re = std::slice::from_raw_parts(re, len);
        let im = std::slice::from_raw_parts(im, len);
        let u0 = ComplexState::new(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(), 0.0);

        let mut cfg = SolverConfig::new(p.tau, p.t_end);
        cfg.delta = p.delta;
        cfg.max_iters = p.max_iters;
        cfg.amplitude_stop_factor = p.amplitude_stop_factor;
        let cb = sampler.map(|f| CallbackSampler { f, user_data });
        let closure = cb.as_ref().map(|c| move |x: f64, t: f64| c.eval(x, t));
        cfg.startup = Some(if closure.is_some() {
            StartupMode::ExactSamples
        } else {
            StartupMode::CascadeCN
        });
        let coeffs = kind.coefficients().map_err(core)?;
        let exact = closure.as_ref().map(|c| c as &(dyn Fn(f64, f64) -> Complex64 + Sync));
        let sim = Simulation::new(&u0, &grid, &nl, &coeffs, &cfg, exact).map_err(core)?;
        *out = Box::into_raw(Box::new(NlsSimulation { sim }));
        Ok(())
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`nls_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_free(sim: *mut NlsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn sim_mut<'a>(sim: *mut NlsSimulation) -> Result<&'a mut NlsSimulation, (NlsStatus, String)> {
    sim.as_mut().ok_or_else(|| null("simulation"))
}

/// Advances one step. `state` receives the run state afterwards; a run
/// that ended with `SolverFailure` still returns `Ok` here.
///
/// # Safety
/// `sim` must be a live handle, `state` valid or null.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_step(sim: *mut NlsSimulation, state: *mut NlsRunState) -> NlsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        let outcome = s.sim.step().map_err(core)?;
        if !state.is_null() {
            *state = match outcome {
                StepOutcome::Advanced => NlsRunState::Running,
                StepOutcome::Finished(t) => Some(t).into(),
            };
        }
        Ok(())
    })
}

/// Steps until the run ends.
///
/// # Safety
/// As for [`nls_simulation_step`].
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_run(sim: *mut NlsSimulation, state: *mut NlsRunState) -> NlsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        let end = loop {
            if let StepOutcome::Finished(t) = s.sim.step().map_err(core)? {
                break t;
            }
        };
        if !state.is_null() {
            *state = Some(end).into();
        }
        Ok(())
    })
}

/// Current time level `n` and time `n τ`.
///
/// # Safety
/// `sim` must be a live handle; outputs valid or null.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_time(sim: *mut NlsSimulation, step: *mut usize, t: *mut f64) -> NlsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        if !step.is_null() {
            *step = s.sim.step_index();
        }
        if !t.is_null() {
            *t = s.sim.time();
        }
        Ok(())
    })
}

/// Number of grid unknowns.
///
/// # Safety
/// `sim` must be a live handle, `len` valid.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_len(sim: *mut NlsSimulation, len: *mut usize) -> NlsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = s.sim.grid().len();
        Ok(())
    })
}

unsafe fn copy_state(state: &ComplexState, re: *mut f64, im: *mut f64, cap: usize) -> Result<(), (NlsStatus, String)> {
    if re.is_null() || im.is_null() {
        return Err(null("output buffer"));
    }
    let n = state.len();
    if cap < n {
        return Err((NlsStatus::BufferTooSmall, format!("need {n} entries, got {cap}")));
    }
    let re = std::slice::from_raw_parts_mut(re, n);
    let im = std::slice::from_raw_parts_mut(im, n);
    for (i, z) in state.values().iter().enumerate() {
        re[i] = z.re;
        im[i] = z.im;
    }
    Ok(())
}

/// Copies the newest `u^n`.
///
/// # Safety
/// `sim` must be a live handle; `re`, `im` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_get_u(sim: *mut NlsSimulation, re: *mut f64, im: *mut f64, cap: usize) -> NlsStatus {
    guard(|| copy_state(sim_mut(sim)?.sim.current_u(), re, im, cap))
}

/// Copies the newest `R^n`.
///
/// # Safety
/// As for [`nls_simulation_get_u`].
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_get_r(sim: *mut NlsSimulation, re: *mut f64, im: *mut f64, cap: usize) -> NlsStatus {
    guard(|| copy_state(sim_mut(sim)?.sim.current_r(), re, im, cap))
}

/// Diagnostics of the newest time level (the startup state before any
/// step has been taken).
///
/// # Safety
/// `sim` must be a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_record(sim: *mut NlsSimulation, out: *mut NlsRecord) -> NlsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = s.sim.records().last().unwrap_or(s.sim.initial_record());
        *out = NlsRecord {
            step: r.step,
            t: r.t,
            mass_r: r.mass_r,
            energy_r: r.energy_r,
            mass_u: r.mass_u,
            energy_u: r.energy_u,
            linf_u: r.linf_u,
            fp_iters: r.fp_iters,
        };
        Ok(())
    })
}

/// Run state without stepping.
///
/// # Safety
/// `sim` must be a live handle, `state` valid.
#[no_mangle]
pub unsafe extern "C" fn nls_simulation_state(sim: *mut NlsSimulation, state: *mut NlsRunState) -> NlsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        if state.is_null() {
            return Err(null("state"));
        }
        *state = s.sim.status().into();
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes_map() {
        assert_eq!(status_of(&NlsError::ZeroOmega), NlsStatus::InvalidArgument);
        assert_eq!(status_of(&NlsError::Unsupported("x".into())), NlsStatus::Unsupported);
        assert_eq!(status_of(&NlsError::RootNotFound("x".into())), NlsStatus::NumericalFailure);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, NlsStatus::Panic);
        let msg = unsafe { CStr::from_ptr(nls_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
        assert_eq!(guard(|| Ok(())), NlsStatus::Ok);
        assert!(nls_last_error_message().is_null());
    }
}
