//! Preset problems, the soliton convergence harness, blow-up time criteria
//! and conservation series.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NlsError, Result};
use crate::grid::{ComplexState, Grid1D};
use crate::nonlinearity::Nonlinearity;
use crate::operators;
use crate::schemes::SchemeKind;
use crate::stepper::{self, RunDiagnostics, Sampler, SolverConfig, StartupMode, StepRecord, TerminalStatus};

/// `sech(x - 4t) exp(i(2x - 3t))`, a soliton of `i u_t + Δu + 2|u|^2 u = 0`.
pub fn soliton_exact(x: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (x - 4.0 * t).cosh(), 2.0 * x - 3.0 * t)
}

/// Initial data families understood by the presets and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `sech(x) exp(2ix)`
    Soliton,
    /// `amplitude * exp(-x^2)`
    Gaussian { amplitude: f64 },
    Zero,
}

impl InitialData {
    pub fn eval(&self, x: f64) -> Complex64 {
        match *self {
            InitialData::Soliton => soliton_exact(x, 0.0),
            InitialData::Gaussian { amplitude } => Complex64::new(amplitude * (-x * x).exp(), 0.0),
            InitialData::Zero => Complex64::new(0.0, 0.0),
        }
    }
}

/// Grid, nonlinearity and initial data, plus the exact solution when known.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid1D,
    pub nl: Nonlinearity,
    pub u0: ComplexState,
    pub exact: Option<fn(f64, f64) -> Complex64>,
}

impl Problem {
    pub fn new(grid: Grid1D, nl: Nonlinearity, init: InitialData) -> Self {
        let u0 = grid.sample(0.0, |x| init.eval(x));
        let exact = match (init, nl.is_cubic() && nl.lambda == -2.0) {
            (InitialData::Soliton, true) => Some(soliton_exact as fn(f64, f64) -> Complex64),
            _ => None,
        };
        Self { grid, nl, u0, exact }
    }

    pub fn sampler(&self) -> Option<Sampler<'_>> {
        self.exact.as_ref().map(|f| f as Sampler<'_>)
    }
}

pub const SOLITON_DOMAIN: (f64, f64) = (-20.0, 20.0);
pub const BLOWUP_DOMAIN: (f64, f64) = (-10.0, 10.0);
pub const BLOWUP_AMPLITUDE: f64 = 1.6;

/// Cubic focusing soliton on periodic `[-20, 20]`, `λ = -2`.
pub fn soliton_problem(n_cells: usize) -> Result<Problem> {
    let g = Grid1D::periodic(SOLITON_DOMAIN.0, SOLITON_DOMAIN.1, n_cells)?;
    Ok(Problem::new(g, Nonlinearity::cubic(-2.0), InitialData::Soliton))
}

/// Focusing quintic problem on periodic `[-10, 10]`, `λ = -1`, with
/// Gaussian data `amplitude * exp(-x^2)`.
pub fn quintic_blowup_problem(n_cells: usize, amplitude: f64) -> Result<Problem> {
    let g = Grid1D::periodic(BLOWUP_DOMAIN.0, BLOWUP_DOMAIN.1, n_cells)?;
    let init = if amplitude == 0.0 {
        InitialData::Zero
    } else {
        InitialData::Gaussian { amplitude }
    };
    Ok(Problem::new(g, Nonlinearity::quintic(-1.0), init))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    /// Discrete l2 norm of the full complex error.
    pub l2: f64,
    pub order: Option<f64>,
    pub l2_re: f64,
    pub order_re: Option<f64>,
    pub linf_re: f64,
    pub order_linf_re: Option<f64>,
    pub l2_im: f64,
    pub order_im: Option<f64>,
    pub linf_im: f64,
    pub order_linf_im: Option<f64>,
}

fn observed_order(prev: f64, cur: f64, tau_prev: f64, tau: f64) -> f64 {
    (prev / cur).ln() / (tau_prev / tau).ln()
}

/// Errors at `t_eval` against the exact soliton for each step size, run
/// in parallel. Orders compare each row with the previous one.
pub fn convergence_study(
    scheme: SchemeKind,
    taus: &[f64],
    n_cells: usize,
    t_eval: f64,
    startup: StartupMode,
) -> Result<Vec<ConvergenceRow>> {
    convergence_study_with(scheme, taus, n_cells, t_eval, startup, 1e-12, 200)
}

pub fn convergence_study_with(
    scheme: SchemeKind,
    taus: &[f64],
    n_cells: usize,
    t_eval: f64,
    startup: StartupMode,
    delta: f64,
    max_iters: usize,
) -> Result<Vec<ConvergenceRow>> {
    if taus.is_empty() {
        return Err(NlsError::InvalidArgument("no time steps given".into()));
    }
    for &tau in taus {
        let ratio = t_eval / tau;
        if !(tau > 0.0) || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(NlsError::InvalidArgument(format!(
                "t_eval = {t_eval} is not a multiple of tau = {tau}"
            )));
        }
    }
    let problem = soliton_problem(n_cells)?;
    let coeffs = scheme.coefficients()?;
    let errors: Vec<[f64; 5]> = taus
        .par_iter()
        .map(|&tau| -> Result<[f64; 5]> {
            let mut cfg = SolverConfig::new(tau, t_eval);
            cfg.startup = Some(startup);
            cfg.delta = delta;
            cfg.max_iters = max_iters;
            let out = stepper::run(&problem.u0, &problem.grid, &problem.nl, &coeffs, &cfg, problem.sampler())?;
            if out.diagnostics.status != TerminalStatus::Completed {
                return Err(match out.diagnostics.failure {
                    Some(f) => f.into(),
                    None => NlsError::RunStopped {
                        t: out.final_u.t(),
                        status: out.diagnostics.status.to_string(),
                    },
                });
            }
            let t = out.final_u.t();
            let exact = problem.grid.sample(t, |x| soliton_exact(x, t));
            let h = problem.grid.h();
            let diff: Vec<Complex64> = out
                .final_u
                .values()
                .iter()
                .zip(exact.values())
                .map(|(a, b)| a - b)
                .collect();
            let l2 = |f: &dyn Fn(&Complex64) -> f64| (h * diff.iter().map(|z| f(z).powi(2)).sum::<f64>()).sqrt();
            let linf = |f: &dyn Fn(&Complex64) -> f64| diff.iter().map(|z| f(z).abs()).fold(0.0, f64::max);
            Ok([
                operators::l2_raw(&diff, h),
                l2(&|z| z.re),
                linf(&|z| z.re),
                l2(&|z| z.im),
                linf(&|z| z.im),
            ])
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(taus.len());
    for (i, (&tau, e)) in taus.iter().zip(&errors).enumerate() {
        let ord = |c: usize| (i > 0).then(|| observed_order(errors[i - 1][c], e[c], taus[i - 1], tau));
        rows.push(ConvergenceRow {
            tau,
            l2: e[0],
            order: ord(0),
            l2_re: e[1],
            order_re: ord(1),
            linf_re: e[2],
            order_linf_re: ord(2),
            l2_im: e[3],
            order_im: ord(3),
            linf_im: e[4],
            order_linf_im: ord(4),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub scheme: SchemeKind,
    pub tau: f64,
    pub n_cells: usize,
    pub t_max: f64,
    pub u_max: f64,
    /// Time of the smallest energy of `R^n`.
    pub t1_r: f64,
    /// End time of the step with the largest energy increase of `R^n`.
    pub t2_r: f64,
    pub status: TerminalStatus,
}

/// Extracts the blow-up times from recorded diagnostics. Ties resolve to
/// the earliest time.
pub fn blowup_criteria(diag: &RunDiagnostics) -> Result<(f64, f64, f64, f64)> {
    let recs: Vec<&StepRecord> = diag.all().collect();
    let first = recs[0];
    let mut max_rec = first;
    let mut min_rec = first;
    for &r in &recs {
        if r.linf_u > max_rec.linf_u {
            max_rec = r;
        }
        if r.energy_r < min_rec.energy_r {
            min_rec = r;
        }
    }
    let mut t2 = first.t;
    let mut best = f64::NEG_INFINITY;
    for w in recs.windows(2) {
        let inc = w[1].energy_r - w[0].energy_r;
        if inc > best {
            best = inc;
            t2 = w[1].t;
        }
    }
    Ok((max_rec.t, max_rec.linf_u, min_rec.t, t2))
}

/// Quintic blow-up run with the preset data (`1.6 exp(-x^2)`).
pub fn blowup_study(scheme: SchemeKind, tau: f64, n_cells: usize) -> Result<BlowupReport> {
    blowup_study_with(scheme, tau, n_cells, BLOWUP_AMPLITUDE, &blowup_config(tau))
}

/// Default run settings for blow-up studies: `t_end = 1`, amplitude stop at
/// ten times the initial peak.
pub fn blowup_config(tau: f64) -> SolverConfig {
    SolverConfig::new(tau, 1.0)
}

pub fn blowup_study_with(
    scheme: SchemeKind,
    tau: f64,
    n_cells: usize,
    amplitude: f64,
    cfg: &SolverConfig,
) -> Result<BlowupReport> {
    let problem = quintic_blowup_problem(n_cells, amplitude)?;
    let mut cfg = cfg.clone();
    cfg.tau = tau;
    let out = stepper::run(
        &problem.u0,
        &problem.grid,
        &problem.nl,
        &scheme.coefficients()?,
        &cfg,
        None,
    )?;
    let (t_max, u_max, t1_r, t2_r) = blowup_criteria(&out.diagnostics)?;
    Ok(BlowupReport {
        scheme,
        tau,
        n_cells,
        t_max,
        u_max,
        t1_r,
        t2_r,
        status: out.diagnostics.status,
    })
}

/// Blow-up reports for every `(scheme, tau)` pair, computed in parallel and
/// returned in input order (schemes outer, steps inner).
pub fn blowup_sweep(schemes: &[SchemeKind], taus: &[f64], n_cells: usize) -> Result<Vec<BlowupReport>> {
    let jobs: Vec<(SchemeKind, f64)> = schemes
        .iter()
        .flat_map(|&s| taus.iter().map(move |&t| (s, t)))
        .collect();
    jobs.par_iter()
        .map(|&(s, t)| blowup_study(s, t, n_cells))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationRow {
    pub t: f64,
    pub mass_r: f64,
    pub energy_r: f64,
    pub mass_u: f64,
    pub energy_u: f64,
}

/// The initial record and every step record, verbatim.
pub fn conservation_series(diag: &RunDiagnostics) -> Result<Vec<ConservationRow>> {
    if diag.records.is_empty() {
        return Err(NlsError::EmptyDiagnostics);
    }
    Ok(diag
        .all()
        .map(|r| ConservationRow {
            t: r.t,
            mass_r: r.mass_r,
            energy_r: r.energy_r,
            mass_u: r.mass_u,
            energy_u: r.energy_u,
        })
        .collect())
}
