//! Scheme coefficients, the auxiliary variable `R^n = sum_j beta_j u^{n-j}`,
//! its inverse (recovering `u^{n+1}` from `R^{n+1}`), and the discrete mass
//! and energy functionals that the update conserves.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;

use crate::error::{NlsError, Result};
use crate::grid::{ComplexState, Grid1D};
use crate::nonlinearity::Nonlinearity;
use crate::operators;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    CrankNicolson,
    Leapfrog,
    /// Modified `s`-step BDF, `2 <= s <= 6`.
    Mbdf(u8),
    FourStepSymmetric,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 8] = [
        SchemeKind::CrankNicolson,
        SchemeKind::Leapfrog,
        SchemeKind::Mbdf(2),
        SchemeKind::Mbdf(3),
        SchemeKind::Mbdf(4),
        SchemeKind::Mbdf(5),
        SchemeKind::Mbdf(6),
        SchemeKind::FourStepSymmetric,
    ];

    pub fn coefficients(self) -> Result<SchemeCoefficients> {
        SchemeCoefficients::new(self)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeKind::CrankNicolson => write!(f, "cn"),
            SchemeKind::Leapfrog => write!(f, "leapfrog"),
            SchemeKind::Mbdf(s) => write!(f, "mbdf{s}"),
            SchemeKind::FourStepSymmetric => write!(f, "sym4"),
        }
    }
}

impl FromStr for SchemeKind {
    type Err = NlsError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        let kind = match lower.as_str() {
            "cn" | "cranknicolson" => SchemeKind::CrankNicolson,
            "lf" | "leapfrog" => SchemeKind::Leapfrog,
            "sym4" | "foursymmetric" | "fourstepsymmetric" | "4stepsymmetric" => {
                SchemeKind::FourStepSymmetric
            }
            other => match other.strip_prefix("mbdf").and_then(|d| d.parse::<u8>().ok()) {
                Some(s) if (2..=6).contains(&s) => SchemeKind::Mbdf(s),
                _ => {
                    return Err(NlsError::InvalidArgument(format!("unknown scheme '{s}'")));
                }
            },
        };
        Ok(kind)
    }
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Backward-difference coefficients `alpha_{s,j}`, `j = 0..=s`, of the
/// classical `s`-step BDF formula `u_t(t_{n+1}) ~ (1/tau) sum_j alpha_j u^{n+1-j}`.
pub fn bdf_alpha(s: u8) -> Result<Vec<Rational64>> {
    let alpha = match s {
        2 => vec![r(3, 2), r(-2, 1), r(1, 2)],
        3 => vec![r(11, 6), r(-3, 1), r(3, 2), r(-1, 3)],
        4 => vec![r(25, 12), r(-4, 1), r(3, 1), r(-4, 3), r(1, 4)],
        5 => vec![
            r(137, 60),
            r(-5, 1),
            r(5, 1),
            r(-10, 3),
            r(5, 4),
            r(-1, 5),
        ],
        6 => vec![
            r(147, 60),
            r(-6, 1),
            r(15, 2),
            r(-20, 3),
            r(15, 4),
            r(-6, 5),
            r(1, 6),
        ],
        _ => {
            return Err(NlsError::Unsupported(format!(
                "BDF with s = {s} (only 2..=6 are zero-stable)"
            )))
        }
    };
    Ok(alpha)
}

/// Partial sums `beta_j = sum_{l <= j} alpha_l`, `j = 0..s-1`, which turn
/// `sum_j alpha_j u^{n+1-j}` into the first difference `R^{n+1} - R^n`.
pub fn beta_from_alpha(alpha: &[f64]) -> Result<Vec<f64>> {
    if alpha.len() < 2 {
        return Err(NlsError::InvalidArgument(
            "need at least two alpha coefficients".into(),
        ));
    }
    let sum: f64 = alpha.iter().sum();
    let scale = alpha.iter().map(|a| a.abs()).fold(1.0, f64::max);
    if sum.abs() > 1e-13 * scale {
        return Err(NlsError::AlphaNotConsistent(sum));
    }
    Ok(alpha[..alpha.len() - 1]
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect())
}

/// Exact-arithmetic version of [`beta_from_alpha`].
pub fn beta_from_alpha_exact(alpha: &[Rational64]) -> Result<Vec<Rational64>> {
    let sum: Rational64 = alpha.iter().sum();
    if sum != r(0, 1) {
        return Err(NlsError::AlphaNotConsistent(to_f64(sum)));
    }
    Ok(alpha[..alpha.len() - 1]
        .iter()
        .scan(r(0, 1), |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect())
}

fn to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn exact_beta(kind: SchemeKind) -> Result<Vec<Rational64>> {
    Ok(match kind {
        SchemeKind::CrankNicolson => vec![r(1, 1)],
        SchemeKind::Leapfrog => vec![r(1, 2), r(1, 2)],
        SchemeKind::Mbdf(s) => beta_from_alpha_exact(&bdf_alpha(s)?)?,
        SchemeKind::FourStepSymmetric => vec![r(-1, 12), r(7, 12), r(7, 12), r(-1, 12)],
    })
}

/// Step count `k` and coefficients `beta_0..beta_{k-1}` of one member of the
/// family. The rational values are kept alongside their `f64` images.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCoefficients {
    kind: SchemeKind,
    exact: Vec<Rational64>,
    beta: Vec<f64>,
}

impl SchemeCoefficients {
    pub fn new(kind: SchemeKind) -> Result<Self> {
        let exact = exact_beta(kind)?;
        let beta = exact.iter().copied().map(to_f64).collect();
        Ok(Self { kind, exact, beta })
    }

    pub fn crank_nicolson() -> Self {
        Self::new(SchemeKind::CrankNicolson).expect("catalogued")
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_exact(&self) -> &[Rational64] {
        &self.exact
    }
}

/// The `k` most recent solution values, newest first.
#[derive(Debug, Clone)]
pub struct UHistory {
    states: VecDeque<ComplexState>,
    capacity: usize,
}

impl UHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            states: VecDeque::with_capacity(capacity + 1),
            capacity: capacity.max(1),
        }
    }

    /// Builds a history from states given oldest first (`u^0, u^1, ...`).
    pub fn from_oldest_first<I>(capacity: usize, states: I) -> Self
    where
        I: IntoIterator<Item = ComplexState>,
    {
        let mut hist = Self::new(capacity);
        for s in states {
            hist.push(s);
        }
        hist
    }

    /// Adds the newest state, evicting the oldest when full.
    pub fn push(&mut self, u: ComplexState) {
        self.states.push_front(u);
        self.states.truncate(self.capacity);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `u^{n-j}`, where `u^n` is the newest state.
    pub fn back(&self, j: usize) -> Option<&ComplexState> {
        self.states.get(j)
    }

    pub fn newest(&self) -> Option<&ComplexState> {
        self.states.front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexState> {
        self.states.iter()
    }
}

/// `R^n = sum_{j<k} beta_j u^{n-j}`, stamped with the time of `u^n`.
pub fn compose_r(hist: &UHistory, c: &SchemeCoefficients) -> Result<ComplexState> {
    let k = c.k();
    if hist.len() < k {
        return Err(NlsError::InsufficientHistory {
            have: hist.len(),
            need: k,
        });
    }
    let newest = hist.newest().expect("k >= 1");
    let mut out = vec![Complex64::new(0.0, 0.0); newest.len()];
    for (j, &b) in c.beta().iter().enumerate() {
        let u = hist.back(j).expect("checked");
        if u.len() != out.len() {
            return Err(NlsError::LengthMismatch {
                expected: out.len(),
                actual: u.len(),
            });
        }
        for (o, z) in out.iter_mut().zip(u.values()) {
            *o += b * z;
        }
    }
    Ok(ComplexState::new(out, newest.t()))
}

/// `u^{n+1} = (R^{n+1} - sum_{j=1}^{k-1} beta_j u^{n+1-j}) / beta_0`.
pub fn recover_u(
    r_next: &ComplexState,
    hist: &UHistory,
    c: &SchemeCoefficients,
) -> Result<ComplexState> {
    let k = c.k();
    if hist.len() < k - 1 {
        return Err(NlsError::InsufficientHistory {
            have: hist.len(),
            need: k - 1,
        });
    }
    let beta = c.beta();
    let mut out: Vec<Complex64> = r_next.values().to_vec();
    for (j, &b) in beta.iter().enumerate().skip(1) {
        let u = hist.back(j - 1).expect("checked");
        if u.len() != out.len() {
            return Err(NlsError::LengthMismatch {
                expected: out.len(),
                actual: u.len(),
            });
        }
        for (o, z) in out.iter_mut().zip(u.values()) {
            *o -= b * z;
        }
    }
    let inv = 1.0 / beta[0];
    for o in &mut out {
        *o *= inv;
    }
    Ok(ComplexState::new(out, r_next.t()))
}

/// Discrete mass `||R||^2`.
pub fn mass(r: &ComplexState, g: &Grid1D) -> Result<f64> {
    Ok(operators::l2_norm(r, g)?.powi(2))
}

/// Discrete energy conserved by the update.
///
/// Cubic: `(1/2)<-Δ_h R, R> + (λ/4) ||R||_4^4`. Other families:
/// `<-Δ_h R, R> + λ h sum F(|R_j|^2)`. For cubic data the second form is
/// exactly twice the first; see [`energy_general`].
pub fn energy(r: &ComplexState, g: &Grid1D, nl: &Nonlinearity) -> Result<f64> {
    if nl.is_cubic() {
        let grad = operators::gradient_norm_sq(r, g)?;
        let quartic = operators::l4_norm_pow4(r, g)?;
        Ok(0.5 * grad + 0.25 * nl.lambda * quartic)
    } else {
        energy_general(r, g, nl)
    }
}

/// `<-Δ_h R, R> + λ h sum F(|R_j|^2)` for any family.
pub fn energy_general(r: &ComplexState, g: &Grid1D, nl: &Nonlinearity) -> Result<f64> {
    let grad = operators::gradient_norm_sq(r, g)?;
    let potential: f64 = r.values().iter().map(|z| nl.big_f(z.norm_sqr())).sum();
    Ok(grad + nl.lambda * g.h() * potential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(v: Complex64, t: f64) -> ComplexState {
        ComplexState::new(vec![v], t)
    }

    #[test]
    fn beta_from_alpha_reproduces_rows() {
        let b = beta_from_alpha(&[1.5, -2.0, 0.5]).unwrap();
        assert_eq!(b, vec![1.5, -0.5]);
        let b = beta_from_alpha(&[11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0]).unwrap();
        assert_relative_eq!(b[0], 11.0 / 6.0);
        assert_relative_eq!(b[1], -7.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(b[2], 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn beta_last_entry_is_minus_last_alpha() {
        for s in 2..=6u8 {
            let alpha = bdf_alpha(s).unwrap();
            let beta = beta_from_alpha_exact(&alpha).unwrap();
            assert_eq!(*beta.last().unwrap(), -*alpha.last().unwrap());
        }
    }

    #[test]
    fn inconsistent_alpha_rejected() {
        assert!(matches!(
            beta_from_alpha(&[1.0, -0.5]),
            Err(NlsError::AlphaNotConsistent(_))
        ));
    }

    #[test]
    fn catalogue_matches_published_table() {
        let table: [(SchemeKind, &[(i64, i64)]); 8] = [
            (SchemeKind::CrankNicolson, &[(1, 1)]),
            (SchemeKind::Leapfrog, &[(1, 2), (1, 2)]),
            (SchemeKind::Mbdf(2), &[(3, 2), (-1, 2)]),
            (SchemeKind::Mbdf(3), &[(11, 6), (-7, 6), (1, 3)]),
            (SchemeKind::Mbdf(4), &[(25, 12), (-23, 12), (13, 12), (-1, 4)]),
            (
                SchemeKind::Mbdf(5),
                &[(137, 60), (-163, 60), (137, 60), (-21, 20), (1, 5)],
            ),
            (
                SchemeKind::Mbdf(6),
                &[(147, 60), (-213, 60), (237, 60), (-163, 60), (31, 30), (-1, 6)],
            ),
            (
                SchemeKind::FourStepSymmetric,
                &[(-1, 12), (7, 12), (7, 12), (-1, 12)],
            ),
        ];
        for (kind, row) in table {
            let coeffs = SchemeCoefficients::new(kind).unwrap();
            let expected: Vec<Rational64> = row.iter().map(|&(n, d)| r(n, d)).collect();
            assert_eq!(coeffs.beta_exact(), expected.as_slice(), "{kind}");
        }
    }

    #[test]
    fn coefficient_invariants() {
        for kind in SchemeKind::ALL {
            let coeffs = SchemeCoefficients::new(kind).unwrap();
            let sum: Rational64 = coeffs.beta_exact().iter().sum();
            assert_eq!(sum, r(1, 1), "{kind}");
            assert!((coeffs.beta().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
            assert_ne!(coeffs.beta()[0], 0.0);
            if let SchemeKind::Mbdf(_) = kind {
                let moment: Rational64 = coeffs
                    .beta_exact()
                    .iter()
                    .enumerate()
                    .map(|(j, b)| b * r(2 * j as i64 + 1, 1))
                    .sum();
                assert_eq!(moment, r(0, 1), "{kind}");
            }
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for kind in SchemeKind::ALL {
            assert_eq!(kind.to_string().parse::<SchemeKind>().unwrap(), kind);
        }
        assert_eq!("M-BDF3".parse::<SchemeKind>().unwrap(), SchemeKind::Mbdf(3));
        assert!("mbdf7".parse::<SchemeKind>().is_err());
        assert!(bdf_alpha(7).is_err());
    }

    #[test]
    fn compose_examples() {
        let cn = SchemeCoefficients::crank_nicolson();
        let hist = UHistory::from_oldest_first(1, [scalar(c(0.3, -0.2), 0.0)]);
        assert_eq!(compose_r(&hist, &cn).unwrap()[0], c(0.3, -0.2));

        let bdf2 = SchemeKind::Mbdf(2).coefficients().unwrap();
        let hist = UHistory::from_oldest_first(2, [scalar(c(0.0, 0.0), 0.0), scalar(c(1.0, 0.0), 0.1)]);
        let rn = compose_r(&hist, &bdf2).unwrap();
        assert_eq!(rn[0], c(1.5, 0.0));
        assert_eq!(rn.t(), 0.1);

        for kind in SchemeKind::ALL {
            let co = kind.coefficients().unwrap();
            let hist = UHistory::from_oldest_first(
                co.k(),
                (0..co.k()).map(|j| scalar(c(2.0, -1.0), j as f64)),
            );
            let rn = compose_r(&hist, &co).unwrap();
            assert!((rn[0] - c(2.0, -1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn insufficient_history() {
        let bdf3 = SchemeKind::Mbdf(3).coefficients().unwrap();
        let hist = UHistory::from_oldest_first(3, [scalar(c(1.0, 0.0), 0.0)]);
        assert!(matches!(
            compose_r(&hist, &bdf3),
            Err(NlsError::InsufficientHistory { have: 1, need: 3 })
        ));
        assert!(recover_u(&scalar(c(1.0, 0.0), 1.0), &hist, &bdf3).is_err());
    }

    #[test]
    fn recover_examples() {
        let cn = SchemeCoefficients::crank_nicolson();
        let hist = UHistory::new(1);
        let u = recover_u(&scalar(c(0.25, 4.0), 1.0), &hist, &cn).unwrap();
        assert_eq!(u[0], c(0.25, 4.0));

        let sym = SchemeKind::FourStepSymmetric.coefficients().unwrap();
        let (u0, u1, u2) = (c(0.1, 0.2), c(-0.3, 0.5), c(0.7, -0.1));
        let hist = UHistory::from_oldest_first(4, [scalar(u0, 0.0), scalar(u1, 1.0), scalar(u2, 2.0)]);
        let rn = c(0.4, -0.9);
        let u = recover_u(&scalar(rn, 3.0), &hist, &sym).unwrap();
        let expected = -12.0 * rn + 7.0 * u2 + 7.0 * u1 - u0;
        assert!((u[0] - expected).norm() < 1e-13);
    }

    #[test]
    fn mass_and_energy_examples() {
        let g = Grid1D::periodic(0.0, 1.0, 16).unwrap();
        let zero = ComplexState::zeros(16, 0.0);
        let cubic = Nonlinearity::cubic(-2.0);
        let quintic = Nonlinearity::quintic(-1.0);
        assert_eq!(mass(&zero, &g).unwrap(), 0.0);
        assert_eq!(energy(&zero, &g, &cubic).unwrap(), 0.0);

        let one = ComplexState::new(vec![c(1.0, 1.0); 16], 0.0);
        assert_relative_eq!(mass(&one, &g).unwrap(), 2.0, max_relative = 1e-14);

        let gl = Grid1D::periodic(0.0, 3.0, 24).unwrap();
        let cst = ComplexState::new(vec![c(0.6, -0.8) * 1.5; 24], 0.0);
        let modulus: f64 = 1.5;
        assert_relative_eq!(
            energy(&cst, &gl, &cubic).unwrap(),
            -2.0 / 4.0 * 3.0 * modulus.powi(4),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            energy(&cst, &gl, &quintic).unwrap(),
            -1.0 * 3.0 * modulus.powi(6) / 3.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn cubic_general_energy_is_twice_cubic_energy() {
        let g = Grid1D::periodic(-5.0, 5.0, 64).unwrap();
        let u = g.sample(0.0, |x| c((-x * x).exp(), 0.3 * x.sin()));
        let nl = Nonlinearity::cubic(-2.0);
        let e = energy(&u, &g, &nl).unwrap();
        let eg = energy_general(&u, &g, &nl).unwrap();
        assert_relative_eq!(eg, 2.0 * e, max_relative = 1e-13);
    }

    fn complex() -> impl Strategy<Value = Complex64> {
        (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex64::new(a, b))
    }

    proptest! {
        #[test]
        fn telescoping_identity(s in 2u8..=6, seq in proptest::collection::vec(complex(), 7)) {
            // sum_j alpha_j u^{s-j} == R(u^s..u^1) - R(u^{s-1}..u^0)
            let alpha = bdf_alpha(s).unwrap();
            let co = SchemeKind::Mbdf(s).coefficients().unwrap();
            let u = &seq[..=s as usize];
            let lhs: Complex64 = alpha
                .iter()
                .enumerate()
                .map(|(j, a)| to_f64(*a) * u[s as usize - j])
                .sum();
            let hist = UHistory::from_oldest_first(co.k(), u.iter().map(|&z| scalar(z, 0.0)));
            let top = compose_r(&hist, &co).unwrap();
            let shifted = UHistory::from_oldest_first(
                co.k(),
                u[..s as usize].iter().map(|&z| scalar(z, 0.0)),
            );
            let bottom = compose_r(&shifted, &co).unwrap();
            let rhs = top[0] - bottom[0];
            let scale = u.iter().map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!((lhs - rhs).norm() <= 1e-13 * scale * 16.0);
        }

        #[test]
        fn recover_then_compose_round_trips(
            idx in 0usize..8,
            hist_vals in proptest::collection::vec(complex(), 6),
            r_next in complex(),
        ) {
            let co = SchemeKind::ALL[idx].coefficients().unwrap();
            let mut hist = UHistory::from_oldest_first(
                co.k(),
                hist_vals[..co.k()].iter().map(|&z| scalar(z, 0.0)),
            );
            let u = recover_u(&scalar(r_next, 1.0), &hist, &co).unwrap();
            hist.push(u);
            let back = compose_r(&hist, &co).unwrap();
            let scale = hist_vals.iter().chain([&r_next]).map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!((back[0] - r_next).norm() <= 1e-13 * scale);
        }
    }
}
