//! Conservative time stepping for the one-dimensional nonlinear
//! Schrödinger equation `i u_t = -Δu + λ f(|u|^2) u`.
//!
//! Every scheme in the family acts on an auxiliary variable
//! `R^n = sum_j beta_j u^{n-j}` through the same midpoint-type update, which
//! conserves a discrete mass and a modified energy of `R`. The crate covers
//! the finite-difference discretization, the fixed-point nonlinear solver,
//! multistep startup, numerical dispersion relations and the soliton and
//! blow-up experiments.

pub mod cli;
pub mod dispersion;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod nonlinearity;
pub mod operators;
pub mod schemes;
pub mod stepper;
pub mod tridiag;

pub use error::{FailureReason, FixedPointFailure, NlsError, Result};
pub use grid::{BoundaryCondition, ComplexState, Grid1D};
pub use nonlinearity::{g_eval, Nonlinearity, NonlinearityFamily};
pub use schemes::{SchemeCoefficients, SchemeKind, UHistory};
pub use stepper::{
    run, RunDiagnostics, RunOutput, Simulation, SolverConfig, StartupMode, StepRecord, TerminalStatus,
};
pub use tridiag::{solve_shifted_system, ShiftedSolver};

pub use num_complex::Complex64;
