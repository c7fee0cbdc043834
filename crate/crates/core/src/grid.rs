//! Uniform one-dimensional meshes and complex grid functions.

use num_complex::Complex64;

use crate::error::{NlsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Periodic,
    HomogeneousDirichlet,
}

/// Uniform mesh on `[a, b]` split into `n_cells` cells.
///
/// Periodic grids carry one unknown per node `x_j = a + j h`, `j = 0..n_cells`
/// (the node at `b` is identified with `a`). Dirichlet grids carry the
/// interior nodes `j = 1..n_cells-1`; boundary values are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_cells: usize,
    bc: BoundaryCondition,
    h: f64,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n_cells: usize, bc: BoundaryCondition) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(NlsError::InvalidArgument(format!(
                "domain must satisfy a < b, got [{a}, {b}]"
            )));
        }
        if n_cells < 3 {
            return Err(NlsError::InvalidArgument(format!(
                "n_cells must be at least 3, got {n_cells}"
            )));
        }
        let h = (b - a) / n_cells as f64;
        Ok(Self {
            a,
            b,
            n_cells,
            bc,
            h,
        })
    }

    pub fn periodic(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        Self::new(a, b, n_cells, BoundaryCondition::Periodic)
    }

    pub fn dirichlet(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        Self::new(a, b, n_cells, BoundaryCondition::HomogeneousDirichlet)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Number of unknowns.
    pub fn len(&self) -> usize {
        match self.bc {
            BoundaryCondition::Periodic => self.n_cells,
            BoundaryCondition::HomogeneousDirichlet => self.n_cells - 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn first_index(&self) -> usize {
        match self.bc {
            BoundaryCondition::Periodic => 0,
            BoundaryCondition::HomogeneousDirichlet => 1,
        }
    }

    /// Coordinate of the `i`-th unknown.
    pub fn x(&self, i: usize) -> f64 {
        self.a + (i + self.first_index()) as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.x(i))
    }

    pub fn sample<F>(&self, t: f64, mut f: F) -> ComplexState
    where
        F: FnMut(f64) -> Complex64,
    {
        ComplexState::new(self.nodes().map(&mut f).collect(), t)
    }

    pub(crate) fn check(&self, u: &ComplexState) -> Result<()> {
        if u.len() != self.len() {
            return Err(NlsError::LengthMismatch {
                expected: self.len(),
                actual: u.len(),
            });
        }
        Ok(())
    }
}

/// Complex grid function with a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState {
    values: Vec<Complex64>,
    t: f64,
}

impl ComplexState {
    pub fn new(values: Vec<Complex64>, t: f64) -> Self {
        Self { values, t }
    }

    pub fn zeros(len: usize, t: f64) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], t)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> ComplexState {
        ComplexState::new(self.values.iter().map(|z| z * s).collect(), self.t)
    }

    /// `self - other`, keeping `self`'s time stamp.
    pub fn sub(&self, other: &ComplexState) -> ComplexState {
        ComplexState::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            self.t,
        )
    }
}

impl std::ops::Index<usize> for ComplexState {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.values[i]
    }
}
