//! Time loop: fixed-point solution of the `R` update, multistep startup,
//! termination near blow-up and per-step diagnostics.

use num_complex::Complex64;

use crate::error::{FailureReason, FixedPointFailure, NlsError, Result};
use crate::grid::{ComplexState, Grid1D};
use crate::nonlinearity::Nonlinearity;
use crate::operators;
use crate::schemes::{self, SchemeCoefficients, SchemeKind, UHistory};
use crate::tridiag::ShiftedSolver;

/// Exact solution `u(x, t)` used for startup samples.
pub type Sampler<'a> = &'a (dyn Fn(f64, f64) -> Complex64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StartupMode {
    /// `u^j = u(x, j tau)` from an exact solution.
    ExactSamples,
    /// `k - 1` Crank-Nicolson steps from `u^0`.
    CascadeCN,
}

impl std::str::FromStr for StartupMode {
    type Err = NlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exact" | "exactsamples" => Ok(StartupMode::ExactSamples),
            "cn" | "cascade" | "cascadecn" => Ok(StartupMode::CascadeCN),
            _ => Err(NlsError::InvalidArgument(format!("unknown startup mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub t_end: f64,
    pub delta: f64,
    pub max_iters: usize,
    /// `None` picks exact samples when a sampler is available, otherwise
    /// cascaded Crank-Nicolson steps.
    pub startup: Option<StartupMode>,
    pub amplitude_stop_factor: f64,
    pub snapshot_times: Vec<f64>,
}

impl SolverConfig {
    pub fn new(tau: f64, t_end: f64) -> Self {
        Self {
            tau,
            t_end,
            delta: 1e-12,
            max_iters: 200,
            startup: None,
            amplitude_stop_factor: 10.0,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NlsError::InvalidArgument(m));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return bad(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.amplitude_stop_factor > 1.0) {
            return bad(format!(
                "amplitude_stop_factor must exceed 1, got {}",
                self.amplitude_stop_factor
            ));
        }
        Ok(())
    }

    /// Number of steps `N` with `N tau >= t_end` (up to rounding).
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_end / self.tau;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Picard iteration for one `R` update, reusing the shifted solver and
/// work buffers across steps.
#[derive(Debug, Clone)]
pub struct FixedPointSolver {
    solver: ShiftedSolver,
    nl: Nonlinearity,
    delta: f64,
    max_iters: usize,
    d: Vec<f64>,
    rhs: Vec<Complex64>,
    w: Vec<Complex64>,
    w_next: Vec<Complex64>,
}

impl FixedPointSolver {
    /// `tau` may be negative, which runs the update backwards in time.
    pub fn new(g: Grid1D, nl: Nonlinearity, tau: f64, delta: f64, max_iters: usize) -> Result<Self> {
        let n = g.len();
        Ok(Self {
            solver: ShiftedSolver::new(g, tau)?,
            nl,
            delta,
            max_iters,
            d: vec![0.0; n],
            rhs: vec![Complex64::new(0.0, 0.0); n],
            w: vec![Complex64::new(0.0, 0.0); n],
            w_next: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn tau(&self) -> f64 {
        self.solver.tau()
    }

    /// Returns `R^{n+1}` and the number of linear solves.
    pub fn step(&mut self, r_n: &ComplexState) -> std::result::Result<(ComplexState, usize), FixedPointFailure> {
        let g = *self.solver.grid();
        let h = g.h();
        let r = r_n.values();
        let coupling = 0.5 * self.nl.lambda * self.solver.tau();
        let fail = |reason, iterations, w: &[Complex64], inc| FixedPointFailure {
            reason,
            iterations,
            last_iterate: ComplexState::new(w.to_vec(), r_n.t()),
            last_increment: inc,
        };

        for (out, z) in self.rhs.iter_mut().zip(r) {
            *out = Complex64::i() * z;
        }
        self.w.copy_from_slice(r);
        let mut increment = f64::INFINITY;
        for iter in 1..=self.max_iters {
            for ((dj, wj), rj) in self.d.iter_mut().zip(&self.w).zip(r) {
                let next = (2.0 * wj - rj).norm_sqr();
                *dj = coupling * self.nl.g_unchecked(next, rj.norm_sqr());
            }
            if self
                .solver
                .solve(&self.d, &self.rhs, &mut self.w_next)
                .is_err()
            {
                return Err(fail(FailureReason::LinearSolve, iter, &self.w, increment));
            }
            increment = (h * self
                .w_next
                .iter()
                .zip(&self.w)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>())
            .sqrt();
            std::mem::swap(&mut self.w, &mut self.w_next);
            if !increment.is_finite() || self.w.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(fail(FailureReason::NonFinite, iter, &self.w, increment));
            }
            if increment <= self.delta {
                let next = self.w.iter().zip(r).map(|(w, r)| 2.0 * w - r).collect();
                return Ok((ComplexState::new(next, r_n.t() + self.solver.tau()), iter));
            }
        }
        Err(fail(
            FailureReason::MaxIterations,
            self.max_iters,
            &self.w,
            increment,
        ))
    }
}

/// One `R` update with a signed step `tau`.
pub fn fixed_point_step(
    r_n: &ComplexState,
    g: &Grid1D,
    nl: &Nonlinearity,
    tau: f64,
    delta: f64,
    max_iters: usize,
) -> Result<(ComplexState, usize)> {
    g.check(r_n)?;
    if !r_n.is_finite() {
        return Err(NlsError::InvalidArgument("R^n must be finite".into()));
    }
    let mut fp = FixedPointSolver::new(*g, *nl, tau, delta, max_iters)?;
    Ok(fp.step(r_n)?)
}

/// One forward `R` update with the step and tolerances from `cfg`.
pub fn fixed_point_update(
    r_n: &ComplexState,
    g: &Grid1D,
    nl: &Nonlinearity,
    cfg: &SolverConfig,
) -> Result<(ComplexState, usize)> {
    cfg.validate()?;
    fixed_point_step(r_n, g, nl, cfg.tau, cfg.delta, cfg.max_iters)
}

fn resolve_startup(cfg: &SolverConfig, exact: Option<Sampler<'_>>) -> StartupMode {
    cfg.startup.unwrap_or(if exact.is_some() {
        StartupMode::ExactSamples
    } else {
        StartupMode::CascadeCN
    })
}

/// Builds `u^0..u^{k-1}`.
pub fn startup(
    u0: &ComplexState,
    g: &Grid1D,
    nl: &Nonlinearity,
    c: &SchemeCoefficients,
    cfg: &SolverConfig,
    exact: Option<Sampler<'_>>,
) -> Result<UHistory> {
    cfg.validate()?;
    g.check(u0)?;
    let k = c.k();
    let mut hist = UHistory::new(k);
    hist.push(u0.clone().with_t(0.0));
    if k == 1 {
        return Ok(hist);
    }
    match resolve_startup(cfg, exact) {
        StartupMode::ExactSamples => {
            let f = exact.ok_or(NlsError::MissingSampler)?;
            for j in 1..k {
                let t = j as f64 * cfg.tau;
                hist.push(g.sample(t, |x| f(x, t)));
            }
        }
        StartupMode::CascadeCN => {
            let mut fp = FixedPointSolver::new(*g, *nl, cfg.tau, cfg.delta, cfg.max_iters)?;
            for j in 1..k {
                let prev = hist.newest().expect("nonempty");
                let (next, _) = fp.step(prev)?;
                hist.push(next.with_t(j as f64 * cfg.tau));
            }
        }
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminalStatus {
    Completed,
    AmplitudeStop,
    SolverFailure,
    NonFinite,
}

impl TerminalStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminalStatus::Completed => "Completed",
            TerminalStatus::AmplitudeStop => "AmplitudeStop",
            TerminalStatus::SolverFailure => "SolverFailure",
            TerminalStatus::NonFinite => "NonFinite",
        }
    }
}

impl std::fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub mass_r: f64,
    pub energy_r: f64,
    pub mass_u: f64,
    pub energy_u: f64,
    pub linf_u: f64,
    pub fp_iters: usize,
}

/// Diagnostics of one run: the state after startup (step `k - 1`, the
/// first `R`) and one record per accepted step after it.
#[derive(Debug, Clone)]
pub struct RunDiagnostics {
    pub initial: StepRecord,
    pub records: Vec<StepRecord>,
    pub status: TerminalStatus,
    pub failure: Option<FixedPointFailure>,
    /// `true` when the energy columns hold the general functional
    /// `<-Δ_h R, R> + λ h sum F`, `false` for the cubic normalization.
    pub general_energy: bool,
}

impl RunDiagnostics {
    /// The initial record followed by the per-step records.
    pub fn all(&self) -> impl Iterator<Item = &StepRecord> {
        std::iter::once(&self.initial).chain(&self.records)
    }

    /// `max_n |M^n - M^0| / M^0` over `R`, measured from the initial record.
    pub fn max_relative_mass_drift(&self) -> f64 {
        relative_drift(self.all().map(|r| r.mass_r))
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        relative_drift(self.all().map(|r| r.energy_r))
    }
}

fn relative_drift(mut values: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = values.next() else {
        return 0.0;
    };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    values.map(|v| (v - first).abs() / scale).fold(0.0, f64::max)
}

fn measure(
    g: &Grid1D,
    nl: &Nonlinearity,
    step: usize,
    t: f64,
    r: &ComplexState,
    u: &ComplexState,
    fp_iters: usize,
) -> Result<StepRecord> {
    Ok(StepRecord {
        step,
        t,
        mass_r: schemes::mass(r, g)?,
        energy_r: schemes::energy(r, g, nl)?,
        mass_u: schemes::mass(u, g)?,
        energy_u: schemes::energy(u, g, nl)?,
        linf_u: operators::linf_norm(u, g)?,
        fp_iters,
    })
}

/// State after a call to [`Simulation::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Advanced,
    Finished(TerminalStatus),
}

/// A run in progress. Owns its history, solver buffers and diagnostics.
#[derive(Debug, Clone)]
pub struct Simulation {
    grid: Grid1D,
    nl: Nonlinearity,
    coeffs: SchemeCoefficients,
    cfg: SolverConfig,
    hist: UHistory,
    r: ComplexState,
    n: usize,
    n_steps: usize,
    linf0: f64,
    fp: FixedPointSolver,
    initial: StepRecord,
    records: Vec<StepRecord>,
    status: Option<TerminalStatus>,
    failure: Option<FixedPointFailure>,
}

impl Simulation {
    pub fn new(
        u0: &ComplexState,
        g: &Grid1D,
        nl: &Nonlinearity,
        c: &SchemeCoefficients,
        cfg: &SolverConfig,
        exact: Option<Sampler<'_>>,
    ) -> Result<Self> {
        let hist = startup(u0, g, nl, c, cfg, exact)?;
        let r = schemes::compose_r(&hist, c)?;
        let fp = FixedPointSolver::new(*g, *nl, cfg.tau, cfg.delta, cfg.max_iters)?;
        let n = c.k() - 1;
        let initial = measure(g, nl, n, n as f64 * cfg.tau, &r, hist.newest().expect("nonempty"), 0)?;
        let mut sim = Self {
            grid: *g,
            nl: *nl,
            coeffs: c.clone(),
            cfg: cfg.clone(),
            hist,
            r,
            n,
            n_steps: cfg.n_steps(),
            linf0: u0.max_abs(),
            fp,
            initial,
            records: Vec::new(),
            status: None,
            failure: None,
        };
        if !sim.current_u().is_finite() || !sim.r.is_finite() {
            sim.status = Some(TerminalStatus::NonFinite);
        } else if sim.n >= sim.n_steps {
            sim.status = Some(TerminalStatus::Completed);
        }
        Ok(sim)
    }

    fn record(&mut self, fp_iters: usize) -> Result<()> {
        let u = self.hist.newest().expect("nonempty");
        let t = self.n as f64 * self.cfg.tau;
        let rec = measure(&self.grid, &self.nl, self.n, t, &self.r, u, fp_iters)?;
        self.records.push(rec);
        Ok(())
    }

    /// Advances one step unless the run has already terminated.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if let Some(s) = self.status {
            return Ok(StepOutcome::Finished(s));
        }
        let (mut r_next, iters) = match self.fp.step(&self.r) {
            Ok(v) => v,
            Err(f) => {
                self.failure = Some(f);
                return Ok(self.finish(TerminalStatus::SolverFailure));
            }
        };
        let t_next = (self.n + 1) as f64 * self.cfg.tau;
        r_next.set_t(t_next);
        let u_next = schemes::recover_u(&r_next, &self.hist, &self.coeffs)?;
        if !u_next.is_finite() || !r_next.is_finite() {
            return Ok(self.finish(TerminalStatus::NonFinite));
        }
        self.hist.push(u_next);
        self.r = r_next;
        self.n += 1;
        self.record(iters)?;

        let linf = self.records.last().expect("recorded").linf_u;
        if self.linf0 > 0.0 && linf >= self.cfg.amplitude_stop_factor * self.linf0 {
            return Ok(self.finish(TerminalStatus::AmplitudeStop));
        }
        if self.n >= self.n_steps {
            return Ok(self.finish(TerminalStatus::Completed));
        }
        Ok(StepOutcome::Advanced)
    }

    fn finish(&mut self, s: TerminalStatus) -> StepOutcome {
        self.status = Some(s);
        StepOutcome::Finished(s)
    }

    pub fn status(&self) -> Option<TerminalStatus> {
        self.status
    }

    pub fn step_index(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.cfg.tau
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn current_u(&self) -> &ComplexState {
        self.hist.newest().expect("nonempty")
    }

    pub fn current_r(&self) -> &ComplexState {
        &self.r
    }

    pub fn initial_record(&self) -> &StepRecord {
        &self.initial
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn failure(&self) -> Option<&FixedPointFailure> {
        self.failure.as_ref()
    }

    pub fn into_diagnostics(self) -> RunDiagnostics {
        RunDiagnostics {
            initial: self.initial,
            records: self.records,
            status: self.status.unwrap_or(TerminalStatus::Completed),
            failure: self.failure,
            general_energy: !self.nl.is_cubic(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub diagnostics: RunDiagnostics,
    /// `u` at the recorded step nearest to each requested snapshot time
    /// that the run reached, in request order.
    pub snapshots: Vec<ComplexState>,
    pub final_u: ComplexState,
    pub final_r: ComplexState,
}

/// Startup followed by the `compose / update / recover` loop until `t_end`
/// or termination. Termination statuses are reported in the diagnostics,
/// not as errors.
pub fn run(
    u0: &ComplexState,
    g: &Grid1D,
    nl: &Nonlinearity,
    c: &SchemeCoefficients,
    cfg: &SolverConfig,
    exact: Option<Sampler<'_>>,
) -> Result<RunOutput> {
    let mut sim = Simulation::new(u0, g, nl, c, cfg, exact)?;
    let wanted: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .map(|&t| (t / cfg.tau).round().max(0.0) as usize)
        .collect();
    let mut snapshots: Vec<Option<ComplexState>> = vec![None; wanted.len()];
    let take = |sim: &Simulation, snaps: &mut Vec<Option<ComplexState>>| {
        for (slot, &n) in snaps.iter_mut().zip(&wanted) {
            if n == sim.step_index() {
                *slot = Some(sim.current_u().clone());
            }
        }
    };
    take(&sim, &mut snapshots);
    while let StepOutcome::Advanced = sim.step()? {
        take(&sim, &mut snapshots);
    }
    if sim.status() != Some(TerminalStatus::NonFinite) {
        take(&sim, &mut snapshots);
    }
    let final_u = sim.current_u().clone();
    let final_r = sim.current_r().clone();
    Ok(RunOutput {
        diagnostics: sim.into_diagnostics(),
        snapshots: snapshots.into_iter().flatten().collect(),
        final_u,
        final_r,
    })
}

/// Convenience wrapper resolving the scheme by kind.
pub fn run_scheme(
    u0: &ComplexState,
    g: &Grid1D,
    nl: &Nonlinearity,
    kind: SchemeKind,
    cfg: &SolverConfig,
    exact: Option<Sampler<'_>>,
) -> Result<RunOutput> {
    run(u0, g, nl, &kind.coefficients()?, cfg, exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn soliton(x: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0 / (x - 4.0 * t).cosh(), 2.0 * x - 3.0 * t)
    }

    fn soliton_grid() -> Grid1D {
        Grid1D::periodic(-20.0, 20.0, 1280).unwrap()
    }

    #[test]
    fn linear_eigenvector_gets_pure_phase() {
        let g = Grid1D::periodic(0.0, 2.0 * PI, 64).unwrap();
        let tau = 0.1;
        let m = 3.0;
        let mu = -(4.0 / g.h().powi(2)) * (m * g.h() / 2.0).sin().powi(2);
        let r = g.sample(0.0, |x| Complex64::from_polar(0.7, m * x));
        let nl = Nonlinearity::cubic(0.0);
        let (next, _) = fixed_point_step(&r, &g, &nl, tau, 1e-12, 200).unwrap();
        let i = Complex64::i();
        let factor = (i - tau * mu / 2.0) / (i + tau * mu / 2.0);
        assert!((factor.norm() - 1.0).abs() < 1e-15);
        for (a, b) in next.values().iter().zip(r.values()) {
            assert!((a - b * factor).norm() < 1e-12);
        }
        let m0 = schemes::mass(&r, &g).unwrap();
        let m1 = schemes::mass(&next, &g).unwrap();
        assert!((m1 - m0).abs() <= 1e-14 * m0);
    }

    #[test]
    fn zero_state_is_fixed_after_one_iteration() {
        let g = Grid1D::periodic(0.0, 1.0, 32).unwrap();
        let (next, iters) =
            fixed_point_step(&ComplexState::zeros(32, 0.0), &g, &Nonlinearity::quintic(-1.0), 0.01, 1e-12, 200)
                .unwrap();
        assert_eq!(iters, 1);
        assert!(next.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn one_soliton_step_is_accurate() {
        let g = soliton_grid();
        let tau = 1e-3;
        let r0 = g.sample(0.0, |x| soliton(x, 0.0));
        let (r1, _) = fixed_point_step(&r0, &g, &Nonlinearity::cubic(-2.0), tau, 1e-12, 200).unwrap();
        let exact = g.sample(tau, |x| soliton(x, tau));
        let err = operators::l2_norm(&r1.sub(&exact), &g).unwrap();
        // local error: O(tau^3) from time plus tau * O(h^2) from space
        assert!(err < tau * g.h().powi(2) * 10.0 + 10.0 * tau.powi(3), "err {err}");
    }

    #[test]
    fn residual_is_controlled_by_delta() {
        let g = Grid1D::periodic(-10.0, 10.0, 200).unwrap();
        let nl = Nonlinearity::cubic(-2.0);
        let tau = 0.01;
        let r0 = g.sample(0.0, |x| soliton(x, 0.0).scale(1.3));
        let (r1, _) = fixed_point_step(&r0, &g, &nl, tau, 1e-12, 200).unwrap();
        let mid = ComplexState::new(
            r0.values().iter().zip(r1.values()).map(|(a, b)| (a + b) / 2.0).collect(),
            0.0,
        );
        let lap = operators::apply_laplacian(&mid, &g).unwrap();
        let res: Vec<Complex64> = (0..g.len())
            .map(|j| {
                let dt = (r1[j] - r0[j]) / tau;
                let gval = nl.g(r1[j].norm_sqr(), r0[j].norm_sqr()).unwrap();
                Complex64::i() * dt + lap[j] - nl.lambda * gval * mid[j]
            })
            .collect();
        let res = operators::l2_norm(&ComplexState::new(res, 0.0), &g).unwrap();
        assert!(res < 1e-12 / tau * 100.0, "residual {res}");
    }

    #[test]
    fn forward_then_backward_returns() {
        let g = Grid1D::periodic(-10.0, 10.0, 256).unwrap();
        let nl = Nonlinearity::cubic(-2.0);
        let r0 = g.sample(0.0, |x| Complex64::new((-x * x / 4.0).exp(), 0.3 * (x / 2.0).sin() * (-x * x / 8.0).exp()));
        let delta = 1e-12;
        let (r1, _) = fixed_point_step(&r0, &g, &nl, 0.01, delta, 200).unwrap();
        let (back, _) = fixed_point_step(&r1, &g, &nl, -0.01, delta, 200).unwrap();
        let d = operators::l2_norm(&back.sub(&r0), &g).unwrap();
        assert!(d <= 10.0 * delta, "distance {d}");
    }

    #[test]
    fn startup_modes() {
        let g = soliton_grid();
        let nl = Nonlinearity::cubic(-2.0);
        let u0 = g.sample(0.0, |x| soliton(x, 0.0));
        let cfg = SolverConfig::new(0.01, 1.0);
        let cn = SchemeCoefficients::crank_nicolson();
        let hist = startup(&u0, &g, &nl, &cn, &cfg, None).unwrap();
        assert_eq!(hist.len(), 1);

        let lf = SchemeKind::Leapfrog.coefficients().unwrap();
        let f: Sampler = &soliton;
        let hist = startup(&u0, &g, &nl, &lf, &cfg, Some(f)).unwrap();
        assert_eq!(hist.newest().unwrap(), &g.sample(0.01, |x| soliton(x, 0.01)));

        let mut cascade = cfg.clone();
        cascade.startup = Some(StartupMode::CascadeCN);
        let hist = startup(&u0, &g, &nl, &lf, &cascade, Some(f)).unwrap();
        let (one, _) = fixed_point_update(&u0, &g, &nl, &cfg).unwrap();
        assert_eq!(hist.newest().unwrap().values(), one.values());

        let mut exact = cfg.clone();
        exact.startup = Some(StartupMode::ExactSamples);
        assert!(matches!(
            startup(&u0, &g, &nl, &lf, &exact, None),
            Err(NlsError::MissingSampler)
        ));
    }

    #[test]
    fn soliton_run_conserves_mass_and_energy() {
        let g = soliton_grid();
        let nl = Nonlinearity::cubic(-2.0);
        let u0 = g.sample(0.0, |x| soliton(x, 0.0));
        let cfg = SolverConfig::new(1.0 / 64.0, 1.0);
        let out = run(&u0, &g, &nl, &SchemeCoefficients::crank_nicolson(), &cfg, None).unwrap();
        let d = &out.diagnostics;
        assert_eq!(d.status, TerminalStatus::Completed);
        assert_eq!(d.records.len(), 64);
        assert_eq!(d.initial.t, 0.0);
        assert!(d.max_relative_mass_drift() <= 1e-8);
        assert!(d.max_relative_energy_drift() <= 1e-8);
        assert!((d.records.last().unwrap().t - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initial_record_is_first_r() {
        let g = Grid1D::periodic(-10.0, 10.0, 100).unwrap();
        let nl = Nonlinearity::cubic(-2.0);
        let u0 = g.sample(0.0, |x| soliton(x, 0.0));
        let mut cfg = SolverConfig::new(0.05, 0.5);
        cfg.snapshot_times = vec![0.25, 0.5, 7.0];
        let out = run_scheme(&u0, &g, &nl, SchemeKind::Mbdf(3), &cfg, Some(&soliton)).unwrap();
        let recs = &out.diagnostics.records;
        assert_eq!(out.diagnostics.initial.step, 2);
        assert_eq!(out.diagnostics.initial.fp_iters, 0);
        assert_eq!(recs[0].step, 3);
        assert_eq!(recs.len(), 8);
        assert_eq!(recs.last().unwrap().step, 10);
        assert!(recs.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(out.snapshots.len(), 2);
        assert_eq!(out.snapshots[1], out.final_u);
    }

    #[test]
    fn zero_data_completes() {
        let g = Grid1D::periodic(-10.0, 10.0, 50).unwrap();
        let cfg = SolverConfig::new(0.1, 1.0);
        let out = run(
            &ComplexState::zeros(50, 0.0),
            &g,
            &Nonlinearity::quintic(-1.0),
            &SchemeCoefficients::crank_nicolson(),
            &cfg,
            None,
        )
        .unwrap();
        assert_eq!(out.diagnostics.status, TerminalStatus::Completed);
        assert!(out.diagnostics.all().all(|r| r.mass_r == 0.0 && r.linf_u == 0.0));
    }

    #[test]
    fn max_iters_one_reports_failure() {
        let g = soliton_grid();
        let u0 = g.sample(0.0, |x| soliton(x, 0.0));
        let mut cfg = SolverConfig::new(0.1, 1.0);
        cfg.max_iters = 1;
        let out = run(&u0, &g, &Nonlinearity::cubic(-2.0), &SchemeCoefficients::crank_nicolson(), &cfg, None)
            .unwrap();
        assert_eq!(out.diagnostics.status, TerminalStatus::SolverFailure);
        let f = out.diagnostics.failure.unwrap();
        assert_eq!(f.reason, FailureReason::MaxIterations);
        assert!(out.diagnostics.records.is_empty());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::new(0.1, 1.0);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.n_steps(), 10);
        cfg.amplitude_stop_factor = 1.0;
        assert!(cfg.validate().is_err());
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        assert_eq!(SolverConfig::new(0.3, 1.0).n_steps(), 4);
        assert_eq!(SolverConfig::new(1.0 / 64.0, 1.0).n_steps(), 64);
    }
}
