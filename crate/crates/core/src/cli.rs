//! Command-line front end for the `nls` binary.
//!
//! Every setting can come from a `key = value` config file or a flag of the
//! same name; flags win over the file, the file wins over presets and
//! presets win over built-in defaults.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dispersion::{self, DispersionQuery};
use crate::error::{NlsError, Result};
use crate::experiments::{self, InitialData, Problem};
use crate::grid::{BoundaryCondition, Grid1D};
use crate::nonlinearity::{Nonlinearity, NonlinearityFamily};
use crate::schemes::SchemeKind;
use crate::stepper::{self, SolverConfig, StartupMode, TerminalStatus};

/// Caps the worker threads used by parallel sweeps.
pub const THREADS_ENV: &str = "NLS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "nls",
    version,
    about = "Conservative time stepping for the 1D nonlinear Schrödinger equation",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run one simulation and write per-step diagnostics.
    Solve(Flags),
    /// Soliton errors and observed orders over a list of time steps.
    Converge(Flags),
    /// Numerical dispersion errors and orders over a list of time steps.
    Dispersion(Flags),
    /// Quintic blow-up run and its blow-up time criteria.
    Blowup(Flags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// Config file with `key = value` lines
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// cn, leapfrog, mbdf2..mbdf6, sym4
    #[arg(long, allow_hyphen_values = true)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// Number of grid cells
    #[arg(long, allow_hyphen_values = true)]
    cells: Option<String>,
    /// Endpoints `a,b`
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// periodic or dirichlet
    #[arg(long)]
    bc: Option<String>,
    /// cubic, quintic or power
    #[arg(long)]
    nl: Option<String>,
    /// Exponent for `--nl power`
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Final time for solve and blowup
    #[arg(long, allow_hyphen_values = true)]
    tend: Option<String>,
    /// Evaluation time for converge
    #[arg(long, allow_hyphen_values = true)]
    teval: Option<String>,
    /// Fixed-point tolerance
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    max_iters: Option<String>,
    /// exact or cascade
    #[arg(long)]
    startup: Option<String>,
    /// Comma-separated, decreasing
    #[arg(long, allow_hyphen_values = true)]
    taus: Option<String>,
    /// Wave number for dispersion
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Exact frequency for dispersion (overrides --k)
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// soliton or quintic-blowup
    #[arg(long)]
    preset: Option<String>,
    /// soliton, gaussian or zero
    #[arg(long)]
    init: Option<String>,
    /// Peak of gaussian initial data
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<String>,
    /// Stop when max|u| reaches this multiple of max|u^0|
    #[arg(long, allow_hyphen_values = true)]
    amplitude_stop: Option<String>,
    /// Output CSV path (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut push = |k: &'static str, val: &Option<String>| {
            if let Some(s) = val {
                v.push((k, s.clone()));
            }
        };
        push("scheme", &self.scheme);
        push("tau", &self.tau);
        push("cells", &self.cells);
        push("domain", &self.domain);
        push("bc", &self.bc);
        push("nl", &self.nl);
        push("p", &self.p);
        push("lambda", &self.lambda);
        push("tend", &self.tend);
        push("teval", &self.teval);
        push("delta", &self.delta);
        push("max_iters", &self.max_iters);
        push("startup", &self.startup);
        push("taus", &self.taus);
        push("k", &self.k);
        push("omega", &self.omega);
        push("preset", &self.preset);
        push("init", &self.init);
        push("amplitude", &self.amplitude);
        push("amplitude_stop", &self.amplitude_stop);
        if let Some(p) = &self.out {
            v.push(("out", p.to_string_lossy().into_owned()));
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Converge,
    Dispersion,
    Blowup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Soliton,
    QuinticBlowup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Soliton,
    Gaussian,
    Zero,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    pub scheme: SchemeKind,
    pub tau: f64,
    pub n_cells: usize,
    pub domain: (f64, f64),
    pub bc: BoundaryCondition,
    pub family: NonlinearityFamily,
    pub lambda: f64,
    pub t_end: f64,
    pub t_eval: f64,
    pub delta: f64,
    pub max_iters: usize,
    pub startup: Option<StartupMode>,
    pub taus: Vec<f64>,
    pub k_wave: f64,
    pub omega: Option<f64>,
    pub preset: Option<Preset>,
    pub init: InitKind,
    pub amplitude: f64,
    pub amplitude_stop: f64,
    pub out: Option<PathBuf>,
}

/// One layer of optional settings (file or flags).
#[derive(Debug, Clone, Default)]
struct Layer {
    scheme: Option<SchemeKind>,
    tau: Option<f64>,
    n_cells: Option<usize>,
    domain: Option<(f64, f64)>,
    bc: Option<BoundaryCondition>,
    nl: Option<String>,
    p: Option<u32>,
    lambda: Option<f64>,
    t_end: Option<f64>,
    t_eval: Option<f64>,
    delta: Option<f64>,
    max_iters: Option<usize>,
    startup: Option<StartupMode>,
    taus: Option<Vec<f64>>,
    k_wave: Option<f64>,
    omega: Option<f64>,
    preset: Option<Preset>,
    init: Option<InitKind>,
    amplitude: Option<f64>,
    amplitude_stop: Option<f64>,
    out: Option<PathBuf>,
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| NlsError::Config(format!("cannot parse {key} = '{v}'")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| num::<f64>(key, s)).collect()
}

impl Layer {
    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let cfg = |e: NlsError| NlsError::Config(e.to_string());
        match key.as_str() {
            "scheme" => self.scheme = Some(v.parse().map_err(cfg)?),
            "tau" => self.tau = Some(num(&key, v)?),
            "cells" | "n_cells" => self.n_cells = Some(num(&key, v)?),
            "domain" => {
                let ends = list(&key, v)?;
                if ends.len() != 2 {
                    return Err(NlsError::Config(format!("domain needs 'a,b', got '{v}'")));
                }
                self.domain = Some((ends[0], ends[1]));
            }
            "bc" => {
                self.bc = Some(match v.trim().to_ascii_lowercase().as_str() {
                    "periodic" => BoundaryCondition::Periodic,
                    "dirichlet" => BoundaryCondition::HomogeneousDirichlet,
                    _ => return Err(NlsError::Config(format!("unknown bc '{v}'"))),
                })
            }
            "nl" => {
                let s = v.trim().to_ascii_lowercase();
                if !matches!(s.as_str(), "cubic" | "quintic" | "power") {
                    return Err(NlsError::Config(format!("unknown nonlinearity '{v}'")));
                }
                self.nl = Some(s);
            }
            "p" => self.p = Some(num(&key, v)?),
            "lambda" => self.lambda = Some(num(&key, v)?),
            "tend" | "t_end" => self.t_end = Some(num(&key, v)?),
            "teval" | "t_eval" => self.t_eval = Some(num(&key, v)?),
            "delta" => self.delta = Some(num(&key, v)?),
            "max_iters" => self.max_iters = Some(num(&key, v)?),
            "startup" => self.startup = Some(v.parse().map_err(cfg)?),
            "taus" => self.taus = Some(list(&key, v)?),
            "k" => self.k_wave = Some(num(&key, v)?),
            "omega" => self.omega = Some(num(&key, v)?),
            "preset" => {
                self.preset = Some(match v.trim().to_ascii_lowercase().replace('_', "-").as_str() {
                    "soliton" => Preset::Soliton,
                    "quintic-blowup" | "blowup" => Preset::QuinticBlowup,
                    _ => return Err(NlsError::Config(format!("unknown preset '{v}'"))),
                })
            }
            "init" => {
                self.init = Some(match v.trim().to_ascii_lowercase().as_str() {
                    "soliton" => InitKind::Soliton,
                    "gaussian" => InitKind::Gaussian,
                    "zero" => InitKind::Zero,
                    _ => return Err(NlsError::Config(format!("unknown initial data '{v}'"))),
                })
            }
            "amplitude" => self.amplitude = Some(num(&key, v)?),
            "amplitude_stop" => self.amplitude_stop = Some(num(&key, v)?),
            "out" => self.out = Some(PathBuf::from(v.trim())),
            _ => return Err(NlsError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Values from `self`, falling back to `lower`.
    fn over(self, lower: Layer) -> Layer {
        Layer {
            scheme: self.scheme.or(lower.scheme),
            tau: self.tau.or(lower.tau),
            n_cells: self.n_cells.or(lower.n_cells),
            domain: self.domain.or(lower.domain),
            bc: self.bc.or(lower.bc),
            nl: self.nl.or(lower.nl),
            p: self.p.or(lower.p),
            lambda: self.lambda.or(lower.lambda),
            t_end: self.t_end.or(lower.t_end),
            t_eval: self.t_eval.or(lower.t_eval),
            delta: self.delta.or(lower.delta),
            max_iters: self.max_iters.or(lower.max_iters),
            startup: self.startup.or(lower.startup),
            taus: self.taus.or(lower.taus),
            k_wave: self.k_wave.or(lower.k_wave),
            omega: self.omega.or(lower.omega),
            preset: self.preset.or(lower.preset),
            init: self.init.or(lower.init),
            amplitude: self.amplitude.or(lower.amplitude),
            amplitude_stop: self.amplitude_stop.or(lower.amplitude_stop),
            out: self.out.or(lower.out),
        }
    }
}

/// Parses a config file body. Blank lines and `#` comments are skipped.
fn parse_config_text(text: &str) -> Result<Layer> {
    let mut layer = Layer::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| NlsError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        layer
            .set(k, v.trim())
            .map_err(|e| NlsError::Config(format!("line {}: {e}", i + 1)))?;
    }
    Ok(layer)
}

fn preset_layer(p: Preset) -> Layer {
    match p {
        Preset::Soliton => Layer {
            domain: Some(experiments::SOLITON_DOMAIN),
            bc: Some(BoundaryCondition::Periodic),
            nl: Some("cubic".into()),
            lambda: Some(-2.0),
            init: Some(InitKind::Soliton),
            ..Layer::default()
        },
        Preset::QuinticBlowup => Layer {
            domain: Some(experiments::BLOWUP_DOMAIN),
            bc: Some(BoundaryCondition::Periodic),
            nl: Some("quintic".into()),
            lambda: Some(-1.0),
            init: Some(InitKind::Gaussian),
            amplitude: Some(experiments::BLOWUP_AMPLITUDE),
            n_cells: Some(2000),
            tau: Some(0.01),
            ..Layer::default()
        },
    }
}

fn resolve(command: Command, merged: Layer) -> Result<CliConfig> {
    let preset = merged.preset.or(match command {
        Command::Blowup => Some(Preset::QuinticBlowup),
        _ => None,
    });
    let mut m = merged;
    if let Some(p) = preset {
        m = m.over(preset_layer(p));
    }
    let default_taus = match command {
        Command::Dispersion => vec![1e-2, 1e-3, 1e-4],
        _ => vec![0.125, 0.0625, 0.03125],
    };
    let default_lambda = match command {
        Command::Dispersion => 2.0,
        _ => -2.0,
    };
    let family = match (m.nl.as_deref().unwrap_or("cubic"), m.p) {
        ("cubic", _) => NonlinearityFamily::Cubic,
        ("quintic", _) => NonlinearityFamily::Quintic,
        ("power", Some(p)) if p >= 1 => NonlinearityFamily::Power(p),
        ("power", _) => return Err(NlsError::Config("--nl power needs --p >= 1".into())),
        (other, _) => return Err(NlsError::Config(format!("unknown nonlinearity '{other}'"))),
    };
    let cfg = CliConfig {
        command,
        scheme: m.scheme.unwrap_or(SchemeKind::CrankNicolson),
        tau: m.tau.unwrap_or(0.015625),
        n_cells: m.n_cells.unwrap_or(1280),
        domain: m.domain.unwrap_or(experiments::SOLITON_DOMAIN),
        bc: m.bc.unwrap_or(BoundaryCondition::Periodic),
        family,
        lambda: m.lambda.unwrap_or(default_lambda),
        t_end: m.t_end.unwrap_or(1.0),
        t_eval: m.t_eval.unwrap_or(2.0),
        delta: m.delta.unwrap_or(1e-12),
        max_iters: m.max_iters.unwrap_or(200),
        startup: m.startup,
        taus: m.taus.unwrap_or(default_taus),
        k_wave: m.k_wave.unwrap_or(1.0),
        omega: m.omega,
        preset,
        init: m.init.unwrap_or(InitKind::Soliton),
        amplitude: m.amplitude.unwrap_or(experiments::BLOWUP_AMPLITUDE),
        amplitude_stop: m.amplitude_stop.unwrap_or(10.0),
        out: m.out,
    };
    if cfg.max_iters == 0 {
        return Err(NlsError::Config("max_iters must be at least 1".into()));
    }
    Ok(cfg)
}

/// Resolves command-line arguments (program name first) into a config.
pub fn parse<I, T>(args: I) -> std::result::Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (command, flags) = match cli.command {
        Cmd::Solve(f) => (Command::Solve, f),
        Cmd::Converge(f) => (Command::Converge, f),
        Cmd::Dispersion(f) => (Command::Dispersion, f),
        Cmd::Blowup(f) => (Command::Blowup, f),
    };
    let to_clap = |e: NlsError| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n"));
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| to_clap(NlsError::Config(format!("{}: {e}", path.display()))))?;
            parse_config_text(&text).map_err(to_clap)?
        }
        None => Layer::default(),
    };
    let mut top = Layer::default();
    for (k, v) in flags.pairs() {
        top.set(k, &v).map_err(to_clap)?;
    }
    resolve(command, top.over(file)).map_err(to_clap)
}

/// A CSV table of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Writes `table` to `path`, or to `stdout` when `path` is `None`.
pub fn emit_csv(table: &Table, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = table.render();
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Result of executing a resolved config.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Set when a non-blow-up run ended in solver failure or non-finite
    /// values.
    pub failure: Option<String>,
}

fn nonlinearity(cfg: &CliConfig) -> Result<Nonlinearity> {
    Nonlinearity::new(cfg.lambda, cfg.family)
}

fn initial_data(cfg: &CliConfig) -> InitialData {
    match cfg.init {
        InitKind::Soliton => InitialData::Soliton,
        InitKind::Gaussian => InitialData::Gaussian {
            amplitude: cfg.amplitude,
        },
        InitKind::Zero => InitialData::Zero,
    }
}

fn solver_config(cfg: &CliConfig, tau: f64, t_end: f64) -> SolverConfig {
    let mut s = SolverConfig::new(tau, t_end);
    s.delta = cfg.delta;
    s.max_iters = cfg.max_iters;
    s.startup = cfg.startup;
    s.amplitude_stop_factor = cfg.amplitude_stop;
    s
}

pub fn execute(cfg: &CliConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Converge => converge(cfg),
        Command::Dispersion => dispersion_table(cfg),
        Command::Blowup => blowup(cfg),
    }
}

fn solve(cfg: &CliConfig) -> Result<Outcome> {
    let grid = Grid1D::new(cfg.domain.0, cfg.domain.1, cfg.n_cells, cfg.bc)?;
    let problem = Problem::new(grid, nonlinearity(cfg)?, initial_data(cfg));
    let scfg = solver_config(cfg, cfg.tau, cfg.t_end);
    let out = stepper::run(
        &problem.u0,
        &problem.grid,
        &problem.nl,
        &cfg.scheme.coefficients()?,
        &scfg,
        problem.sampler(),
    )?;
    let mut table = Table::new(&[
        "step", "t", "mass_R", "energy_R", "mass_u", "energy_u", "linf_u", "fp_iters",
    ]);
    for r in &out.diagnostics.records {
        table.rows.push(vec![
            r.step.to_string(),
            fmt_float(r.t),
            fmt_float(r.mass_r),
            fmt_float(r.energy_r),
            fmt_float(r.mass_u),
            fmt_float(r.energy_u),
            fmt_float(r.linf_u),
            r.fp_iters.to_string(),
        ]);
    }
    let status = out.diagnostics.status;
    let failed = matches!(status, TerminalStatus::SolverFailure | TerminalStatus::NonFinite);
    let failure = (failed && cfg.preset != Some(Preset::QuinticBlowup)).then(|| {
        match &out.diagnostics.failure {
            Some(f) => format!("run stopped at t = {}: {f}", out.final_u.t()),
            None => format!("run stopped at t = {} with status {status}", out.final_u.t()),
        }
    });
    Ok(Outcome { table, failure })
}

fn converge(cfg: &CliConfig) -> Result<Outcome> {
    let rows = experiments::convergence_study_with(
        cfg.scheme,
        &cfg.taus,
        cfg.n_cells,
        cfg.t_eval,
        cfg.startup.unwrap_or(StartupMode::ExactSamples),
        cfg.delta,
        cfg.max_iters,
    )?;
    let mut table = Table::new(&[
        "tau",
        "l2_re",
        "order_re",
        "linf_re",
        "order_linf_re",
        "l2_im",
        "order_im",
        "linf_im",
        "order_linf_im",
    ]);
    for r in rows {
        table.rows.push(vec![
            fmt_float(r.tau),
            fmt_float(r.l2_re),
            fmt_opt(r.order_re),
            fmt_float(r.linf_re),
            fmt_opt(r.order_linf_re),
            fmt_float(r.l2_im),
            fmt_opt(r.order_im),
            fmt_float(r.linf_im),
            fmt_opt(r.order_linf_im),
        ]);
    }
    Ok(Outcome {
        table,
        failure: None,
    })
}

fn dispersion_table(cfg: &CliConfig) -> Result<Outcome> {
    let first = *cfg
        .taus
        .first()
        .ok_or_else(|| NlsError::Config("taus is empty".into()))?;
    let q = match cfg.omega {
        Some(w) => DispersionQuery::with_omega(cfg.scheme, w, cfg.lambda, first)?,
        None => DispersionQuery::new(cfg.scheme, cfg.k_wave, cfg.lambda, first)?,
    };
    let rows = dispersion::rate_table(&q, &cfg.taus)?;
    let mut table = Table::new(&["tau", "omega", "omega_tilde", "error", "order"]);
    for r in rows {
        table.rows.push(vec![
            fmt_float(r.tau),
            fmt_float(r.omega),
            fmt_float(r.omega_tilde),
            fmt_float(r.error),
            fmt_opt(r.order),
        ]);
    }
    Ok(Outcome {
        table,
        failure: None,
    })
}

fn blowup(cfg: &CliConfig) -> Result<Outcome> {
    let scfg = solver_config(cfg, cfg.tau, cfg.t_end);
    let rep = experiments::blowup_study_with(cfg.scheme, cfg.tau, cfg.n_cells, cfg.amplitude, &scfg)?;
    let mut table = Table::new(&[
        "scheme", "tau", "n_cells", "t_max", "u_max", "t1_R", "t2_R", "status",
    ]);
    table.rows.push(vec![
        rep.scheme.to_string(),
        fmt_float(rep.tau),
        rep.n_cells.to_string(),
        fmt_float(rep.t_max),
        fmt_float(rep.u_max),
        fmt_float(rep.t1_r),
        fmt_float(rep.t2_r),
        rep.status.to_string(),
    ]);
    Ok(Outcome {
        table,
        failure: None,
    })
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 for
/// usage or configuration errors, 2 when a run fails.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::error::ErrorKind;

    let cfg = match parse(args) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    init_threads();
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return match e {
                NlsError::FixedPoint(_) | NlsError::RunStopped { .. } => 2,
                _ => 1,
            };
        }
    };
    if let Err(e) = emit_csv(&outcome.table, cfg.out.as_deref(), stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    match outcome.failure {
        Some(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        None => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("nls".to_string())
            .chain(s.split_whitespace().map(String::from))
            .collect()
    }

    #[test]
    fn solve_flags_resolve() {
        let c = parse(args(
            "solve --scheme cn --tau 0.015625 --cells 1280 --domain -20,20 --tend 1 --nl cubic --lambda -2",
        ))
        .unwrap();
        assert_eq!(c.command, Command::Solve);
        assert_eq!(c.scheme, SchemeKind::CrankNicolson);
        assert_eq!(c.domain, (-20.0, 20.0));
        assert_eq!(c.lambda, -2.0);
        assert_eq!(c.n_cells, 1280);
    }

    #[test]
    fn dispersion_defaults() {
        let c = parse(args("dispersion --scheme mbdf2 --k 1 --lambda 2 --taus 1e-2,1e-3,1e-4")).unwrap();
        assert_eq!(c.taus, vec![1e-2, 1e-3, 1e-4]);
        assert_eq!(c.scheme, SchemeKind::Mbdf(2));
        let c = parse(args("dispersion")).unwrap();
        assert_eq!(c.lambda, 2.0);
    }

    #[test]
    fn empty_args_are_a_usage_error() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run_cli(args(""), &mut out, &mut err), 1);
        assert!(!err.is_empty());
        assert_eq!(run_cli(args("--help"), &mut out, &mut err), 0);
    }

    #[test]
    fn config_precedence() {
        let file = parse_config_text("# comment\nscheme = mbdf3\ntau = 0.5 # trailing\n\ncells=64\n").unwrap();
        let mut flags = Layer::default();
        flags.set("tau", "0.25").unwrap();
        let c = resolve(Command::Solve, flags.over(file)).unwrap();
        assert_eq!(c.scheme, SchemeKind::Mbdf(3));
        assert_eq!(c.tau, 0.25);
        assert_eq!(c.n_cells, 64);
        assert_eq!(c.delta, 1e-12);
    }

    #[test]
    fn config_errors() {
        assert!(parse_config_text("nonsense = 1").is_err());
        assert!(parse_config_text("tau 0.1").is_err());
        assert!(parse_config_text("tau = abc").is_err());
        assert!(parse_config_text("domain = 1").is_err());
    }

    #[test]
    fn preset_then_overrides() {
        let c = parse(args("blowup --cells 500")).unwrap();
        assert_eq!(c.preset, Some(Preset::QuinticBlowup));
        assert_eq!(c.n_cells, 500);
        assert_eq!(c.tau, 0.01);
        assert_eq!(c.family, NonlinearityFamily::Quintic);
        let c = parse(args("solve --preset quintic-blowup --lambda -0.5")).unwrap();
        assert_eq!(c.lambda, -0.5);
        assert_eq!(c.domain, (-10.0, 10.0));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(0.015625), "1.5625000000000000e-2");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.render(), "a,b\n");
    }

    #[test]
    fn power_needs_exponent() {
        assert!(parse(args("solve --nl power")).is_err());
        let c = parse(args("solve --nl power --p 3")).unwrap();
        assert_eq!(c.family, NonlinearityFamily::Power(3));
    }
}
