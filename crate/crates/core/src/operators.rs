//! Discrete Laplacian, inner products and norms on a [`Grid1D`].
//!
//! The three-point Laplacian is symmetric and negative semidefinite with
//! respect to `<u, v> = h * sum(u_j * conj(v_j))` for both boundary
//! conditions, so summation by parts holds exactly.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{BoundaryCondition, ComplexState, Grid1D};

/// `(u_{j-1} - 2 u_j + u_{j+1}) / h^2`, wrapping (periodic) or with zero
/// ghost values (Dirichlet).
pub fn apply_laplacian(u: &ComplexState, g: &Grid1D) -> Result<ComplexState> {
    g.check(u)?;
    let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
    laplacian_into(u.values(), g, &mut out);
    Ok(ComplexState::new(out, u.t()))
}

pub(crate) fn laplacian_into(u: &[Complex64], g: &Grid1D, out: &mut [Complex64]) {
    let n = u.len();
    let inv_h2 = 1.0 / (g.h() * g.h());
    let zero = Complex64::new(0.0, 0.0);
    let (left_ghost, right_ghost) = match g.bc() {
        BoundaryCondition::Periodic => (u[n - 1], u[0]),
        BoundaryCondition::HomogeneousDirichlet => (zero, zero),
    };
    for j in 0..n {
        let left = if j == 0 { left_ghost } else { u[j - 1] };
        let right = if j + 1 == n { right_ghost } else { u[j + 1] };
        out[j] = (left - 2.0 * u[j] + right) * inv_h2;
    }
}

/// `h * sum_j u_j * conj(v_j)`.
pub fn inner_product(u: &ComplexState, v: &ComplexState, g: &Grid1D) -> Result<Complex64> {
    g.check(u)?;
    g.check(v)?;
    Ok(inner_raw(u.values(), v.values(), g.h()))
}

pub(crate) fn inner_raw(u: &[Complex64], v: &[Complex64], h: f64) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum::<Complex64>() * h
}

pub fn l2_norm(u: &ComplexState, g: &Grid1D) -> Result<f64> {
    g.check(u)?;
    Ok(l2_raw(u.values(), g.h()))
}

pub(crate) fn l2_raw(u: &[Complex64], h: f64) -> f64 {
    (h * u.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// `h * sum |u_j|^4`, i.e. the fourth power of the discrete L4 norm.
pub fn l4_norm_pow4(u: &ComplexState, g: &Grid1D) -> Result<f64> {
    g.check(u)?;
    Ok(g.h() * u.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>())
}

pub fn linf_norm(u: &ComplexState, g: &Grid1D) -> Result<f64> {
    g.check(u)?;
    Ok(u.max_abs())
}

/// `<-Δ_h u, u>`, the discrete squared gradient norm (real and nonnegative
/// up to rounding).
pub fn gradient_norm_sq(u: &ComplexState, g: &Grid1D) -> Result<f64> {
    g.check(u)?;
    Ok(gradient_norm_sq_raw(u.values(), g))
}

pub(crate) fn gradient_norm_sq_raw(u: &[Complex64], g: &Grid1D) -> f64 {
    // Sum of squared forward differences; identical to <-Δ_h u, u> by
    // summation by parts and never negative.
    let n = u.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = 0.0;
    match g.bc() {
        BoundaryCondition::Periodic => {
            for j in 0..n {
                acc += (u[(j + 1) % n] - u[j]).norm_sqr();
            }
        }
        BoundaryCondition::HomogeneousDirichlet => {
            acc += (u[0] - zero).norm_sqr();
            for j in 0..n - 1 {
                acc += (u[j + 1] - u[j]).norm_sqr();
            }
            acc += (zero - u[n - 1]).norm_sqr();
        }
    }
    acc / g.h()
}
