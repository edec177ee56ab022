//! Periodic grids on the 2π-torus, Fourier transforms and exact spectral
//! differentiation.
//!
//! Coefficients are stored normalized (divided by the number of grid
//! points), so a field `sin x` has coefficients `∓i/2` at `k = ±1`. Wavenumbers
//! along an axis of `size` points run over `-size/2+1 ..= size/2`; the last one
//! is the Nyquist mode, which carries no sign and is dropped by odd-order
//! derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::field::Field;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// A uniform periodic grid with `size` points per axis on `[0, 2π)^dim`.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    size: usize,
    plans: Arc<Plans>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.size == other.size
    }
}

impl Eq for Grid {}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("size", &self.size)
            .finish()
    }
}

/// Builds a torus grid. `dim` must be 1 or 2, `size` even and at least 8.
pub fn make_grid(dim: usize, size: usize) -> Result<Grid> {
    Grid::new(dim, size)
}

impl Grid {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if !size.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "size must be even, got odd size {size}"
            )));
        }
        if size < 8 {
            return Err(Error::InvalidGrid(format!(
                "size must be at least 8, got {size}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        };
        Ok(Self {
            dim,
            size,
            plans: Arc::new(plans),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    pub fn num_points(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    /// Lebesgue measure of the torus, `(2π)^dim`.
    pub fn measure(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    pub fn nyquist(&self) -> i64 {
        (self.size / 2) as i64
    }

    /// Integer wavenumber stored at position `j` along one axis.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.size / 2 {
            j as i64
        } else {
            j as i64 - self.size as i64
        }
    }

    fn axis_indices(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat % self.size, flat / self.size]
        }
    }

    /// Physical coordinates of a flat point index. The unused second
    /// coordinate is zero on 1-D grids.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.axis_indices(flat);
        let h = self.spacing();
        [i as f64 * h, j as f64 * h]
    }

    /// Wavevector of a flat mode index.
    pub fn wavevector(&self, flat: usize) -> [i64; 2] {
        let [i, j] = self.axis_indices(flat);
        if self.dim == 1 {
            [self.wavenumber(i), 0]
        } else {
            [self.wavenumber(i), self.wavenumber(j)]
        }
    }

    /// Flat index of a wavevector, if it lies on the lattice.
    pub fn mode_index(&self, k: [i64; 2]) -> Option<usize> {
        let n = self.size as i64;
        let wrap = |kk: i64| -> Option<usize> {
            if kk > n / 2 || kk <= -n / 2 {
                None
            } else {
                Some(kk.rem_euclid(n) as usize)
            }
        };
        if self.dim == 1 {
            if k[1] != 0 {
                return None;
            }
            wrap(k[0])
        } else {
            Some(wrap(k[0])? + self.size * wrap(k[1])?)
        }
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        (k[0] * k[0] + k[1] * k[1]) as f64
    }

    /// Wavevector seen by first derivatives: Nyquist components are zeroed.
    pub fn odd_wavevector(&self, flat: usize) -> [f64; 2] {
        let k = self.wavevector(flat);
        let nyq = self.nyquist();
        let f = |kk: i64| if kk == nyq { 0.0 } else { kk as f64 };
        [f(k[0]), f(k[1])]
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.size;
        debug_assert_eq!(buf.len(), self.num_points());
        plan.process(buf);
        if self.dim == 2 {
            let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
            for j in 0..n {
                for i in 0..n {
                    t[i * n + j] = buf[j * n + i];
                }
            }
            plan.process(&mut t);
            for j in 0..n {
                for i in 0..n {
                    buf[j * n + i] = t[i * n + j];
                }
            }
        }
    }

    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.plans.forward);
        let norm = 1.0 / self.num_points() as f64;
        buf.iter_mut().for_each(|c| *c *= norm);
        buf
    }

    pub(crate) fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, &self.plans.inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// True if the mode survives the 2/3 rule.
    pub fn is_retained(&self, flat: usize) -> bool {
        let k = self.wavevector(flat);
        let s = self.size as i64;
        k.iter().all(|kk| 3 * kk.abs() <= s)
    }
}

/// Fourier coefficients of a multi-component field.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    ncomp: usize,
    coeffs: Vec<Complex64>,
    t: f64,
    eta: f64,
}

impl SpectralField {
    pub(crate) fn from_raw(grid: Grid, ncomp: usize, coeffs: Vec<Complex64>, t: f64, eta: f64) -> Self {
        debug_assert_eq!(coeffs.len(), ncomp * grid.num_points());
        Self {
            grid,
            ncomp,
            coeffs,
            t,
            eta,
        }
    }

    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        let len = ncomp * grid.num_points();
        Self::from_raw(grid.clone(), ncomp, vec![Complex64::new(0.0, 0.0); len], 0.0, 0.0)
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

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.num_points();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.num_points();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    /// Coefficient of wavevector `k` in component `c` (zero off-lattice).
    pub fn coefficient(&self, c: usize, k: [i64; 2]) -> Complex64 {
        match self.grid.mode_index(k) {
            Some(i) => self.component(c)[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_coefficient(&mut self, c: usize, k: [i64; 2], value: Complex64) {
        if let Some(i) = self.grid.mode_index(k) {
            self.component_mut(c)[i] = value;
        }
    }

    /// Multiplies every mode by `symbol(k)`, the same for all components.
    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> Complex64) -> SpectralField {
        let n = self.grid.num_points();
        let table: Vec<Complex64> = (0..n).map(&symbol).collect();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * table[i % n])
            .collect();
        Self::from_raw(self.grid.clone(), self.ncomp, coeffs, self.t, self.eta)
    }

    /// Largest violation of `c(-k) = conj(c(k))` over all modes.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.num_points();
        let mut worst = 0.0_f64;
        for c in 0..self.ncomp {
            let comp = self.component(c);
            for i in 0..n {
                let k = self.grid.wavevector(i);
                let mirror = wrap_negate(&self.grid, k);
                let j = self.grid.mode_index(mirror).expect("mirrored mode on lattice");
                worst = worst.max((comp[i] - comp[j].conj()).norm());
            }
        }
        worst
    }

    /// Root-sum-square of coefficients times the torus measure; by
    /// Parseval this equals the `l2` value of [`field_norms`].
    pub fn l2(&self) -> f64 {
        let ss: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        ss.sqrt() * self.grid.measure()
    }
}

fn wrap_negate(grid: &Grid, k: [i64; 2]) -> [i64; 2] {
    let n = grid.size() as i64;
    let neg = |kk: i64| {
        let m = -kk;
        if m <= -n / 2 {
            m + n
        } else {
            m
        }
    };
    if grid.dim() == 1 {
        [neg(k[0]), 0]
    } else {
        [neg(k[0]), neg(k[1])]
    }
}

pub fn to_spectral(f: &Field) -> SpectralField {
    let grid = f.grid();
    let mut coeffs = Vec::with_capacity(f.values().len());
    for c in 0..f.ncomp() {
        coeffs.extend(grid.forward(f.component(c)));
    }
    SpectralField::from_raw(grid.clone(), f.ncomp(), coeffs, f.t(), f.eta())
}

pub fn from_spectral(s: &SpectralField) -> Field {
    let grid = s.grid();
    let mut values = Vec::with_capacity(s.coeffs.len());
    for c in 0..s.ncomp {
        values.extend(grid.inverse(s.component(c)));
    }
    Field::from_raw(grid.clone(), s.ncomp, values, s.t, s.eta)
}

/// Symbol of `∂^order/∂x_axis^order` at mode `flat`.
pub(crate) fn derivative_symbol(grid: &Grid, flat: usize, axis: usize, order: u32) -> Complex64 {
    let k = grid.wavevector(flat)[axis];
    if order % 2 == 1 && k == grid.nyquist() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, k as f64).powu(order)
}

/// Exact derivative of a band-limited field along one axis.
pub fn spectral_derivative(f: &Field, axis: usize, order: u32) -> Result<Field> {
    if axis >= f.grid().dim() {
        return Err(invalid(
            "axis",
            format!("axis {axis} out of range for a {}-D grid", f.grid().dim()),
        ));
    }
    if order == 0 {
        return Err(invalid("order", "derivative order must be at least 1"));
    }
    Ok(spectral_derivative_unchecked(f, axis, order))
}

pub(crate) fn spectral_derivative_unchecked(f: &Field, axis: usize, order: u32) -> Field {
    let grid = f.grid().clone();
    let s = to_spectral(f).apply_symbol(|i| derivative_symbol(&grid, i, axis, order));
    from_spectral(&s)
}

pub fn laplacian(f: &Field) -> Field {
    from_spectral(&spectral_laplacian(&to_spectral(f)))
}

pub(crate) fn spectral_laplacian(s: &SpectralField) -> SpectralField {
    let grid = s.grid().clone();
    s.apply_symbol(|i| Complex64::new(-grid.k_squared(i), 0.0))
}

/// 2/3-rule truncation: zeroes every mode with some `|k_axis| > size/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid().clone();
    f.apply_symbol(|i| {
        if grid.is_retained(i) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Physical-space 2/3 truncation of every component.
pub fn truncate(f: &Field) -> Field {
    from_spectral(&dealias(&to_spectral(f)))
}

/// Pointwise product of scalar fields with 2/3 dealiasing: every factor is
/// truncated, the product formed on the grid, then truncated again.
pub fn dealiased_product(factors: &[&Field]) -> Result<Field> {
    let first = factors
        .first()
        .ok_or_else(|| invalid("factors", "empty product"))?;
    let grid = first.grid().clone();
    for f in factors {
        if f.grid() != &grid || f.ncomp() != 1 {
            return Err(Error::ShapeMismatch(
                "dealiased_product expects scalar fields on one grid".into(),
            ));
        }
    }
    let truncated: Vec<Vec<f64>> = factors.iter().map(|f| truncate_values(&grid, f.values())).collect();
    let refs: Vec<&[f64]> = truncated.iter().map(|v| v.as_slice()).collect();
    let values = truncated_product(&grid, &refs);
    Ok(Field::from_raw(grid, 1, values, first.t(), first.eta()))
}

pub(crate) fn truncate_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let mut c = grid.forward(values);
    for (i, ci) in c.iter_mut().enumerate() {
        if !grid.is_retained(i) {
            *ci = Complex64::new(0.0, 0.0);
        }
    }
    grid.inverse(&c)
}

/// Product of already-truncated factors, truncated afterwards.
pub(crate) fn truncated_product(grid: &Grid, factors: &[&[f64]]) -> Vec<f64> {
    let n = grid.num_points();
    let mut acc = vec![1.0; n];
    for f in factors {
        for (a, b) in acc.iter_mut().zip(f.iter()) {
            *a *= b;
        }
    }
    truncate_values(grid, &acc)
}

/// Norms used by the error bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    /// Grid root-mean-square over all components, times the torus measure.
    pub l2: f64,
    /// Largest absolute value over all components and points.
    pub max: f64,
}

pub fn field_norms(f: &Field) -> Norms {
    let n = f.grid().num_points() as f64;
    let ss: f64 = f.values().iter().map(|v| v * v).sum();
    Norms {
        l2: (ss / n).sqrt() * f.grid().measure(),
        max: f.max_abs(),
    }
}
