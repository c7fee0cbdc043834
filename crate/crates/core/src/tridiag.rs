//! Solves `(i I + (tau/2) Δ_h - diag(d)) w = rhs`.
//!
//! The operator is tridiagonal with constant real off-diagonals
//! `tau / (2 h^2)` and complex diagonal `i - tau/h^2 - d_j`. Periodic grids
//! add the two corner entries; those are handled with a Sherman-Morrison
//! correction on top of a single tridiagonal factorization, so every solve
//! is O(n).

use num_complex::Complex64;

use crate::error::{NlsError, Result};
use crate::grid::{BoundaryCondition, ComplexState, Grid1D};

const PIVOT_TOL: f64 = 1e-14;

/// LU factors of a tridiagonal matrix with constant off-diagonal `off`.
#[derive(Debug, Clone, Default)]
pub(crate) struct TridiagonalLu {
    off: f64,
    // multipliers l_i = off / m_{i-1} (l_0 unused) and pivots m_i
    lower: Vec<Complex64>,
    pivots: Vec<Complex64>,
}

impl TridiagonalLu {
    pub(crate) fn factor(&mut self, diag: &[Complex64], off: f64) -> Result<()> {
        let n = diag.len();
        self.off = off;
        self.lower.resize(n, Complex64::new(0.0, 0.0));
        self.pivots.resize(n, Complex64::new(0.0, 0.0));
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let m = if i == 0 {
                diag[0]
            } else {
                let l = off / prev;
                self.lower[i] = l;
                diag[i] - l * off
            };
            let scale = diag[i].norm() + 2.0 * off.abs();
            let threshold = PIVOT_TOL * scale;
            if !(m.norm() >= threshold) {
                return Err(NlsError::SingularSystem {
                    row: i,
                    pivot: m.norm(),
                    threshold,
                });
            }
            self.pivots[i] = m;
            prev = m;
        }
        Ok(())
    }

    /// Overwrites `x` (holding the right-hand side) with the solution.
    pub(crate) fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = x.len();
        for i in 1..n {
            let prev = x[i - 1];
            x[i] -= self.lower[i] * prev;
        }
        x[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] = (x[i] - self.off * next) / self.pivots[i];
        }
    }
}

/// Reusable solver for the shifted system; keeps factorization buffers
/// between calls so the fixed-point loop does not allocate.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    grid: Grid1D,
    tau: f64,
    diag: Vec<Complex64>,
    lu: TridiagonalLu,
    correction: Vec<Complex64>,
}

impl ShiftedSolver {
    /// `tau` may be negative (a backward step); it must be finite and
    /// nonzero.
    pub fn new(grid: Grid1D, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(NlsError::InvalidArgument(format!(
                "time step must be finite and nonzero, got {tau}"
            )));
        }
        let n = grid.len();
        Ok(Self {
            grid,
            tau,
            diag: vec![Complex64::new(0.0, 0.0); n],
            lu: TridiagonalLu::default(),
            correction: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Solves for `w` given the real diagonal shift `d` and `rhs`; the
    /// solution is written to `out`.
    pub fn solve(&mut self, d: &[f64], rhs: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let n = self.grid.len();
        for (len, _) in [(d.len(), 0), (rhs.len(), 1), (out.len(), 2)] {
            if len != n {
                return Err(NlsError::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        let h = self.grid.h();
        let off = self.tau / (2.0 * h * h);
        let centre = -self.tau / (h * h);
        for (dj, &shift) in self.diag.iter_mut().zip(d) {
            *dj = Complex64::new(centre - shift, 1.0);
        }
        out.copy_from_slice(rhs);

        match self.grid.bc() {
            BoundaryCondition::HomogeneousDirichlet => {
                self.lu.factor(&self.diag, off)?;
                self.lu.solve_in_place(out);
            }
            BoundaryCondition::Periodic => {
                // A = T' + u v^T with u = (gamma, 0, .., off) and
                // v = (1, 0, .., off / gamma).
                let gamma = -self.diag[0];
                let first = self.diag[0];
                let last = self.diag[n - 1];
                self.diag[0] = first - gamma;
                self.diag[n - 1] = last - off * off / gamma;
                self.lu.factor(&self.diag, off)?;
                self.diag[0] = first;
                self.diag[n - 1] = last;

                self.lu.solve_in_place(out);
                self.correction.fill(Complex64::new(0.0, 0.0));
                self.correction[0] = gamma;
                self.correction[n - 1] = Complex64::new(off, 0.0);
                self.lu.solve_in_place(&mut self.correction);

                let ratio = off / gamma;
                let denom = 1.0 + self.correction[0] + ratio * self.correction[n - 1];
                let threshold = PIVOT_TOL * (1.0 + self.correction[0].norm());
                if !(denom.norm() >= threshold) {
                    return Err(NlsError::SingularSystem {
                        row: n - 1,
                        pivot: denom.norm(),
                        threshold,
                    });
                }
                let factor = (out[0] + ratio * out[n - 1]) / denom;
                for (o, z) in out.iter_mut().zip(&self.correction) {
                    *o -= factor * z;
                }
            }
        }
        Ok(())
    }
}

/// Returns `w` with `(i I + (tau/2) Δ_h - diag(d)) w = rhs`.
pub fn solve_shifted_system(
    d: &[f64],
    rhs: &ComplexState,
    g: &Grid1D,
    tau: f64,
) -> Result<ComplexState> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(NlsError::InvalidArgument(format!(
            "tau must be positive, got {tau}"
        )));
    }
    g.check(rhs)?;
    let mut solver = ShiftedSolver::new(*g, tau)?;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    solver.solve(d, rhs.values(), &mut out)?;
    Ok(ComplexState::new(out, rhs.t()))
}
