//! Numerical dispersion of the cubic schemes.
//!
//! A plane wave `u^n = exp(i(kx - ω̃ t_n))` fed through the scheme gives
//! `R^n = B(θ) u^n` with `B(θ) = sum_j beta_j e^{ijθ}` and `θ = ω̃ τ`. The
//! update then reduces to
//!
//! ```text
//! (2/τ) sin(θ/2) = (k^2 + λ Φ(θ)) cos(θ/2),   Φ(θ) = |B(θ)|^2,
//! ```
//!
//! and `Φ` expands into the cosine series `c_0 + sum_m c_m cos(mθ)` with
//! `c_0 = sum_j beta_j^2` and `c_m = 2 sum_j beta_j beta_{j+m}`. Crank-Nicolson
//! has `Φ = 1`, Leapfrog `Φ = cos^2(θ/2)`.

use std::f64::consts::PI;

use num_rational::Rational64;

use crate::error::{NlsError, Result};
use crate::schemes::{SchemeCoefficients, SchemeKind};

/// `ω = k^2 + λ`.
pub fn exact_omega(k_wave: f64, lambda: f64) -> f64 {
    k_wave * k_wave + lambda
}

/// `|ω - ω̃| / ω`.
pub fn dispersion_error(omega: f64, omega_t: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(NlsError::ZeroOmega);
    }
    Ok(((omega - omega_t) / omega).abs())
}

/// Cosine-series coefficients `c_0..c_{k-1}` of `Φ`, exact.
pub fn phi_coefficients(kind: SchemeKind) -> Result<Vec<Rational64>> {
    if kind == SchemeKind::FourStepSymmetric {
        return Err(unsupported(kind));
    }
    let c = SchemeCoefficients::new(kind)?;
    let b = c.beta_exact();
    let k = b.len();
    Ok((0..k)
        .map(|m| {
            let s: Rational64 = (0..k - m).map(|j| b[j] * b[j + m]).sum();
            if m == 0 {
                s
            } else {
                s * Rational64::from_integer(2)
            }
        })
        .collect())
}

fn unsupported(kind: SchemeKind) -> NlsError {
    NlsError::Unsupported(format!("no dispersion relation for scheme {kind}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionQuery {
    pub scheme: SchemeKind,
    pub k_wave: f64,
    pub lambda: f64,
    pub tau: f64,
    k_sq: f64,
    phi: Vec<f64>,
}

impl DispersionQuery {
    pub fn new(scheme: SchemeKind, k_wave: f64, lambda: f64, tau: f64) -> Result<Self> {
        Self::build(scheme, k_wave, k_wave * k_wave, lambda, tau)
    }

    /// Query whose exact frequency is `omega`: `k^2 = omega - lambda`.
    pub fn with_omega(scheme: SchemeKind, omega: f64, lambda: f64, tau: f64) -> Result<Self> {
        let k_sq = omega - lambda;
        if !(k_sq >= 0.0) {
            return Err(NlsError::InvalidArgument(format!(
                "omega = {omega} below lambda = {lambda} needs imaginary k"
            )));
        }
        Self::build(scheme, k_sq.sqrt(), k_sq, lambda, tau)
    }

    fn build(scheme: SchemeKind, k_wave: f64, k_sq: f64, lambda: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(NlsError::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        if !(k_wave.is_finite() && lambda.is_finite()) {
            return Err(NlsError::InvalidArgument("k and lambda must be finite".into()));
        }
        let phi = phi_coefficients(scheme)?
            .into_iter()
            .map(|q| *q.numer() as f64 / *q.denom() as f64)
            .collect();
        Ok(Self {
            scheme,
            k_wave,
            lambda,
            tau,
            k_sq,
            phi,
        })
    }

    pub fn omega(&self) -> f64 {
        self.k_sq + self.lambda
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::build(self.scheme, self.k_wave, self.k_sq, self.lambda, tau)
    }

    /// `Φ(θ)` and `dΦ/dθ`.
    fn phi(&self, theta: f64) -> (f64, f64) {
        let mut val = self.phi[0];
        let mut der = 0.0;
        for (m, c) in self.phi.iter().enumerate().skip(1) {
            let m = m as f64;
            val += c * (m * theta).cos();
            der -= c * m * (m * theta).sin();
        }
        (val, der)
    }

    /// Residual `g(ω̃)` and `g'(ω̃)`.
    fn eval(&self, omega_t: f64) -> (f64, f64) {
        let tau = self.tau;
        let theta = omega_t * tau;
        let (s, c) = (theta / 2.0).sin_cos();
        let (phi, dphi) = self.phi(theta);
        let a = self.k_sq + self.lambda * phi;
        let g = 2.0 / tau * s - a * c;
        let dg = c - self.lambda * dphi * tau * c + a * tau / 2.0 * s;
        (g, dg)
    }
}

pub fn dispersion_residual(q: &DispersionQuery, omega_t: f64) -> f64 {
    q.eval(omega_t).0
}

/// Root of the dispersion relation on the branch through `ω`.
pub fn solve_omega_tilde(q: &DispersionQuery) -> Result<f64> {
    let omega = q.omega();
    let upper = PI / q.tau;
    if !(omega > 0.0 && omega < upper) {
        return Err(NlsError::InvalidArgument(format!(
            "exact omega {omega} outside (0, pi/tau) = (0, {upper})"
        )));
    }
    if q.scheme == SchemeKind::CrankNicolson {
        return Ok(2.0 / q.tau * (omega * q.tau / 2.0).atan());
    }
    let tol = 1e-13 * omega.max(1.0);

    let mut x = omega;
    let mut newton_ok = false;
    for _ in 0..60 {
        let (g, dg) = q.eval(x);
        if !(dg.is_finite() && dg != 0.0) {
            break;
        }
        let step = g / dg;
        let next = x - step;
        if !(next > 0.0 && next < upper) {
            break;
        }
        x = next;
        if step.abs() <= 4.0 * f64::EPSILON * x {
            newton_ok = q.eval(x).0.abs() <= tol;
            break;
        }
    }
    if newton_ok {
        return Ok(x);
    }

    let mut lo = (0.5 * omega).max(f64::MIN_POSITIVE);
    let mut hi = (1.5 * omega).min(upper * (1.0 - 1e-12));
    let (mut glo, ghi) = (q.eval(lo).0, q.eval(hi).0);
    if glo.signum() == ghi.signum() {
        return Err(NlsError::RootNotFound(format!(
            "no sign change on [{lo}, {hi}] for {} with omega {omega}",
            q.scheme
        )));
    }
    while hi - lo > 2.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        let gm = q.eval(mid).0;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    if q.eval(root).0.abs() <= tol {
        Ok(root)
    } else {
        Err(NlsError::RootNotFound(format!(
            "bisection stalled at {root} for {} (residual {:e})",
            q.scheme,
            q.eval(root).0
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub tau: f64,
    pub omega: f64,
    pub omega_tilde: f64,
    pub error: f64,
    /// `None` on the first row.
    pub order: Option<f64>,
}

/// Dispersion errors over strictly decreasing steps, with observed orders
/// `log(e_{i-1}/e_i) / log(tau_{i-1}/tau_i)`.
pub fn rate_table(q: &DispersionQuery, taus: &[f64]) -> Result<Vec<RateRow>> {
    if taus.len() < 2 {
        return Err(NlsError::InvalidArgument("need at least two time steps".into()));
    }
    if taus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(NlsError::InvalidArgument(
            "time steps must be strictly decreasing".into(),
        ));
    }
    let mut rows: Vec<RateRow> = Vec::with_capacity(taus.len());
    for &tau in taus {
        let qt = q.with_tau(tau)?;
        let omega = qt.omega();
        let omega_tilde = solve_omega_tilde(&qt)?;
        let error = dispersion_error(omega, omega_tilde)?;
        let order = rows
            .last()
            .map(|p| (p.error / error).ln() / (p.tau / tau).ln());
        rows.push(RateRow {
            tau,
            omega,
            omega_tilde,
            error,
            order,
        });
    }
    Ok(rows)
}
