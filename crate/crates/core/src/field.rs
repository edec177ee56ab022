//! Sampled multi-component fields and symmetric tensor fields.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{invalid, Error, Result};
use crate::spectral::Grid;

/// Real multi-component function sampled on a periodic grid, tagged with its
/// time and scale coordinates. Values are stored component-major.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    ncomp: usize,
    data: Vec<f64>,
    t: f64,
    eta: f64,
}

impl Field {
    pub fn new(grid: &Grid, ncomp: usize, data: Vec<f64>, t: f64, eta: f64) -> Result<Self> {
        if ncomp == 0 {
            return Err(invalid("ncomp", "a field needs at least one component"));
        }
        if data.len() != ncomp * grid.num_points() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for {} components on {:?}, got {}",
                ncomp * grid.num_points(),
                ncomp,
                grid,
                data.len()
            )));
        }
        if !(eta >= 0.0) || !t.is_finite() || !eta.is_finite() {
            return Err(invalid("eta", format!("scale must be finite and non-negative, got {eta}")));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values".into()));
        }
        Ok(Self::from_raw(grid.clone(), ncomp, data, t, eta))
    }

    pub(crate) fn from_raw(grid: Grid, ncomp: usize, data: Vec<f64>, t: f64, eta: f64) -> Self {
        debug_assert_eq!(data.len(), ncomp * grid.num_points());
        Self {
            grid,
            ncomp,
            data,
            t,
            eta,
        }
    }

    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        Self::from_raw(grid.clone(), ncomp, vec![0.0; ncomp * grid.num_points()], 0.0, 0.0)
    }

    /// Samples `f(component, point)` at every grid point.
    pub fn from_fn(grid: &Grid, ncomp: usize, f: impl Fn(usize, [f64; 2]) -> f64) -> Self {
        let n = grid.num_points();
        let mut data = Vec::with_capacity(ncomp * n);
        for c in 0..ncomp {
            for i in 0..n {
                data.push(f(c, grid.point(i)));
            }
        }
        Self::from_raw(grid.clone(), ncomp, data, 0.0, 0.0)
    }

    /// Concatenates the components of several fields on one grid.
    pub fn stack(parts: &[&Field]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("parts", "nothing to stack"))?;
        let mut data = Vec::new();
        let mut ncomp = 0;
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::ShapeMismatch("stacked fields live on different grids".into()));
            }
            data.extend_from_slice(&p.data);
            ncomp += p.ncomp;
        }
        Ok(Self::from_raw(first.grid.clone(), ncomp, data, first.t, first.eta))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.num_points();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.num_points();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Single component as a scalar field.
    pub fn extract(&self, c: usize) -> Field {
        Self::from_raw(self.grid.clone(), 1, self.component(c).to_vec(), self.t, self.eta)
    }

    /// Components `range` as a new field.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Field {
        let n = self.grid.num_points();
        let ncomp = range.len();
        Self::from_raw(
            self.grid.clone(),
            ncomp,
            self.data[range.start * n..range.end * n].to_vec(),
            self.t,
            self.eta,
        )
    }

    pub fn with_coordinates(mut self, t: f64, eta: f64) -> Self {
        self.t = t;
        self.eta = eta;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.check_compatible(other);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn mean(&self, c: usize) -> f64 {
        let comp = self.component(c);
        comp.iter().sum::<f64>() / comp.len() as f64
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Field) {
        self.check_compatible(x);
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
    }

    pub fn scaled(&self, a: f64) -> Field {
        let data = self.data.iter().map(|v| a * v).collect();
        Self::from_raw(self.grid.clone(), self.ncomp, data, self.t, self.eta)
    }

    fn check_compatible(&self, other: &Field) {
        assert!(
            self.grid == other.grid && self.ncomp == other.ncomp,
            "incompatible fields: {:?}x{} vs {:?}x{}",
            self.grid,
            self.ncomp,
            other.grid,
            other.ncomp
        );
    }

    fn zip_with(&self, other: &Field, op: impl Fn(f64, f64) -> f64) -> Field {
        self.check_compatible(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| op(*a, *b)).collect();
        Self::from_raw(self.grid.clone(), self.ncomp, data, self.t, self.eta)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scaled(rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scaled(-1.0)
    }
}

/// Symmetric rank-2 tensor field; each unordered pair `(a, b)`, `a <= b`,
/// is stored once.
#[derive(Clone, Debug)]
pub struct TensorField {
    grid: Grid,
    dim: usize,
    pairs: Vec<Vec<f64>>,
    t: f64,
    eta: f64,
}

impl TensorField {
    pub(crate) fn from_pairs(grid: &Grid, pairs: Vec<Vec<f64>>, t: f64, eta: f64) -> Self {
        let dim = grid.dim();
        debug_assert_eq!(pairs.len(), dim * (dim + 1) / 2);
        Self {
            grid: grid.clone(),
            dim,
            pairs,
            t,
            eta,
        }
    }

    fn pair_index(&self, a: usize, b: usize) -> usize {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        // row-major upper triangle
        lo * self.dim - lo * (lo + 1) / 2 + hi
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn get(&self, a: usize, b: usize) -> &[f64] {
        &self.pairs[self.pair_index(a, b)]
    }

    /// Component `(a, b)` as a scalar field.
    pub fn component(&self, a: usize, b: usize) -> Field {
        Field::from_raw(self.grid.clone(), 1, self.get(a, b).to_vec(), self.t, self.eta)
    }

    pub fn max_abs(&self) -> f64 {
        self.pairs
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Smallest eigenvalue of the tensor over all grid points.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.grid.num_points();
        (0..n)
            .map(|i| {
                if self.dim == 1 {
                    self.get(0, 0)[i]
                } else {
                    let (a, b, d) = (self.get(0, 0)[i], self.get(0, 1)[i], self.get(1, 1)[i]);
                    let mean = 0.5 * (a + d);
                    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                    mean - rad
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}
