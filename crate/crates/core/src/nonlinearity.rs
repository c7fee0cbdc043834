//! Nonlinear potentials `λ f(|u|^2) u` and the difference quotient `G`.

use crate::error::{NlsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonlinearityFamily {
    /// `f(s) = s`
    Cubic,
    /// `f(s) = s^2`
    Quintic,
    /// `f(s) = s^p`, `p >= 1`
    Power(u32),
}

impl NonlinearityFamily {
    pub fn exponent(&self) -> u32 {
        match *self {
            NonlinearityFamily::Cubic => 1,
            NonlinearityFamily::Quintic => 2,
            NonlinearityFamily::Power(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub lambda: f64,
    pub family: NonlinearityFamily,
}

impl Nonlinearity {
    pub fn new(lambda: f64, family: NonlinearityFamily) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(NlsError::InvalidArgument(format!("lambda = {lambda}")));
        }
        if let NonlinearityFamily::Power(0) = family {
            return Err(NlsError::InvalidArgument(
                "power nonlinearity needs p >= 1".into(),
            ));
        }
        Ok(Self { lambda, family })
    }

    pub fn cubic(lambda: f64) -> Self {
        Self {
            lambda,
            family: NonlinearityFamily::Cubic,
        }
    }

    pub fn quintic(lambda: f64) -> Self {
        Self {
            lambda,
            family: NonlinearityFamily::Quintic,
        }
    }

    pub fn is_cubic(&self) -> bool {
        self.family.exponent() == 1
    }

    pub fn f(&self, s: f64) -> f64 {
        s.powi(self.family.exponent() as i32)
    }

    /// Antiderivative of `f` with `F(0) = 0`.
    pub fn big_f(&self, s: f64) -> f64 {
        let p = self.family.exponent() as i32;
        s.powi(p + 1) / (p + 1) as f64
    }

    /// `G(a, b) = (F(a) - F(b)) / (a - b)`, continuous across `a = b`.
    pub fn g(&self, a: f64, b: f64) -> Result<f64> {
        if a < 0.0 || b < 0.0 {
            return Err(NlsError::NegativeArgument(a, b));
        }
        Ok(self.g_unchecked(a, b))
    }

    pub(crate) fn g_unchecked(&self, a: f64, b: f64) -> f64 {
        match self.family.exponent() {
            1 => (a + b) / 2.0,
            2 => (a * a + a * b + b * b) / 3.0,
            p => {
                if (a - b).abs() <= 1e-12 * a.max(b).max(1.0) {
                    return self.f((a + b) / 2.0);
                }
                // sum_{j=0}^{p} a^{p-j} b^j, evaluated by Horner in b/a
                let (big, small) = if a >= b { (a, b) } else { (b, a) };
                let r = small / big;
                let mut acc = 1.0;
                for _ in 0..p {
                    acc = acc * r + 1.0;
                }
                big.powi(p as i32) * acc / (p + 1) as f64
            }
        }
    }
}

/// Free-function form of [`Nonlinearity::g`].
pub fn g_eval(nl: &Nonlinearity, a: f64, b: f64) -> Result<f64> {
    nl.g(a, b)
}
