//! Numeric evaluation of jet polynomials on sampled fields.

use std::collections::BTreeMap;

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::spectral::{derivative_symbol, from_spectral, to_spectral, truncate_values, Grid};

use super::index::{Coord, JetIndex};
use super::ops::JetExpr;

/// Numeric values of jet variables on one grid.
///
/// Entries are scalar fields. A variable that was not inserted is derived on
/// demand when some entry differs from it only by spatial derivatives; the
/// remaining indices (time and scale derivatives of unknown fields) must be
/// supplied.
#[derive(Clone, Debug)]
pub struct JetValues {
    grid: Grid,
    t: f64,
    eta: f64,
    entries: BTreeMap<JetIndex, Field>,
}

impl JetValues {
    pub fn new(grid: &Grid, t: f64, eta: f64) -> Self {
        Self {
            grid: grid.clone(),
            t,
            eta,
            entries: BTreeMap::new(),
        }
    }

    /// Seeds `u^α` from the components of `u`.
    pub fn from_field(u: &Field) -> Self {
        let mut j = Self::new(u.grid(), u.t(), u.eta());
        for c in 0..u.ncomp() {
            j.entries.insert(JetIndex::base(c), u.extract(c));
        }
        j
    }

    /// Seeds `u^α` from `u` and `u^α_t` from `u_t`.
    pub fn with_time_derivative(u: &Field, u_t: &Field) -> Result<Self> {
        let mut j = Self::from_field(u);
        j.insert_components(u_t, Coord::T)?;
        Ok(j)
    }

    /// Inserts every component of `f` as `u^α_{coord}`.
    pub fn insert_components(&mut self, f: &Field, coord: Coord) -> Result<()> {
        for c in 0..f.ncomp() {
            self.insert(JetIndex::base(c).with(coord), f.extract(c))?;
        }
        Ok(())
    }

    pub fn insert(&mut self, index: JetIndex, value: Field) -> Result<()> {
        if value.grid() != &self.grid || value.ncomp() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "jet {index} must be a scalar field on the common grid"
            )));
        }
        self.entries.insert(index, value);
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, index: &JetIndex) -> bool {
        self.entries.contains_key(index)
    }

    /// Value of one jet variable, differentiating a stored entry in space
    /// when needed.
    pub fn resolve(&self, index: &JetIndex) -> Result<Field> {
        if let Some(f) = self.entries.get(index) {
            return Ok(f.clone());
        }
        let (rest, counts, overflow) = index.split_spatial();
        let dim = self.grid.dim();
        let out_of_range = overflow || (dim == 1 && counts[1] > 0);
        if out_of_range || counts == [0, 0] {
            return Err(Error::MissingJet(index.to_string()));
        }
        let base = self
            .entries
            .get(&rest)
            .ok_or_else(|| Error::MissingJet(index.to_string()))?;
        let grid = self.grid.clone();
        let s = to_spectral(base).apply_symbol(|i| {
            let mut z = Complex64::new(1.0, 0.0);
            for (axis, &n) in counts.iter().enumerate().take(dim) {
                if n > 0 {
                    z *= derivative_symbol(&grid, i, axis, n);
                }
            }
            z
        });
        Ok(from_spectral(&s))
    }
}

/// Evaluates every component of `expr` pointwise. Monomials of degree two
/// or more are products of 2/3-truncated factors, and their sum is
/// truncated once; constant and linear terms are left untouched.
pub fn jet_evaluate(expr: &JetExpr, jets: &JetValues) -> Result<Field> {
    if expr.is_empty() {
        return Err(invalid("expr", "expression has no components"));
    }
    let grid = jets.grid().clone();
    let n = grid.num_points();
    let mut plain: BTreeMap<JetIndex, Field> = BTreeMap::new();
    let mut truncated: BTreeMap<JetIndex, Vec<f64>> = BTreeMap::new();
    for var in expr.variables() {
        let f = jets.resolve(&var)?;
        plain.insert(var, f);
    }
    let mut out = Vec::with_capacity(n * expr.len());
    for poly in expr.components() {
        let mut linear = vec![0.0; n];
        let mut nonlinear = vec![0.0; n];
        let mut any_nonlinear = false;
        for (mono, c) in poly.to_f64_coeffs() {
            match mono.degree() {
                0 => linear.iter_mut().for_each(|v| *v += c),
                1 => {
                    let (idx, _) = mono.factors().next().expect("degree one");
                    for (v, x) in linear.iter_mut().zip(plain[idx].values()) {
                        *v += c * x;
                    }
                }
                _ => {
                    any_nonlinear = true;
                    let mut prod = vec![c; n];
                    for (idx, p) in mono.factors() {
                        let tv = truncated
                            .entry(idx.clone())
                            .or_insert_with(|| truncate_values(&grid, plain[idx].values()));
                        for _ in 0..p {
                            for (a, b) in prod.iter_mut().zip(tv.iter()) {
                                *a *= b;
                            }
                        }
                    }
                    for (a, b) in nonlinear.iter_mut().zip(&prod) {
                        *a += b;
                    }
                }
            }
        }
        if any_nonlinear {
            let t = truncate_values(&grid, &nonlinear);
            for (a, b) in linear.iter_mut().zip(t) {
                *a += b;
            }
        }
        out.extend(linear);
    }
    Field::new(&grid, expr.len(), out, jets.t, jets.eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::jet::ops::{jet_total_derivative, JetExpr};
    use crate::jet::parse::parse_core;
    use crate::jet::poly::{rational, Monomial, Poly};
    use crate::spectral::{make_grid, spectral_derivative};
    use proptest::prelude::*;

    #[test]
    fn burgers_source_on_sine() {
        let g = make_grid(1, 64).unwrap();
        let u = Field::from_fn(&g, 1, |_, x| x[0].sin());
        let s = parse_core("-2*u1_x1*u1_x1x1").unwrap();
        let r = jet_evaluate(&s, &JetValues::from_field(&u)).unwrap();
        let expected = Field::from_fn(&g, 1, |_, x| (2.0 * x[0]).sin());
        assert!(r.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn zero_expression() {
        let g = make_grid(2, 16).unwrap();
        let u = Field::from_fn(&g, 1, |_, x| x[0].cos());
        let e = JetExpr::new(2, 1, vec![Poly::zero()]);
        let r = jet_evaluate(&e, &JetValues::from_field(&u)).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn missing_jet_names_the_index() {
        let g = make_grid(1, 16).unwrap();
        let u = Field::from_fn(&g, 1, |_, x| x[0].cos());
        let core = parse_core("u1_t + u1*u1_x1").unwrap();
        match jet_evaluate(&core, &JetValues::from_field(&u)) {
            Err(Error::MissingJet(name)) => assert_eq!(name, "u1_t"),
            other => panic!("expected a missing jet, got {other:?}"),
        }
        let y = JetIndex::base(0).with(Coord::X(2));
        assert!(matches!(
            JetValues::from_field(&u).resolve(&y),
            Err(Error::MissingJet(_))
        ));
    }

    #[test]
    fn mixed_time_space_jets_are_derived() {
        let g = make_grid(2, 16).unwrap();
        let u = Field::from_fn(&g, 1, |_, x| x[0].sin() * x[1].cos());
        let ut = Field::from_fn(&g, 1, |_, x| (2.0 * x[0]).cos());
        let jets = JetValues::with_time_derivative(&u, &ut).unwrap();
        let idx = JetIndex::new(0, [Coord::T, Coord::X(1)]);
        let expected = Field::from_fn(&g, 1, |_, x| -2.0 * (2.0 * x[0]).sin());
        assert!(jets.resolve(&idx).unwrap().max_abs_diff(&expected) < 1e-12);
        let idx = JetIndex::new(0, [Coord::X(1), Coord::X(2)]);
        let expected = Field::from_fn(&g, 1, |_, x| -x[0].cos() * x[1].sin());
        assert!(jets.resolve(&idx).unwrap().max_abs_diff(&expected) < 1e-12);
    }

    fn random_field(grid: &Grid, ncomp: usize, seed: &[f64]) -> Field {
        // Band-limited: modes with |k_axis| <= 3 only.
        Field::from_fn(grid, ncomp, |c, x| {
            let mut v = 0.0;
            for (m, a) in seed.iter().enumerate() {
                let kx = (m % 4) as f64;
                let ky = ((m / 4 + c) % 4) as f64;
                v += a * (kx * x[0] + ky * x[1] + 0.3 * (m + c) as f64).cos();
            }
            v
        })
    }

    fn order_one_vars(ncomp: usize) -> Vec<JetIndex> {
        let mut v = Vec::new();
        for c in 0..ncomp {
            v.push(JetIndex::base(c));
            v.push(JetIndex::base(c).with(Coord::T));
            v.push(JetIndex::base(c).with(Coord::X(1)));
            v.push(JetIndex::base(c).with(Coord::X(2)));
        }
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn total_derivative_is_chain_rule(
            terms in prop::collection::vec(
                (-5i64..=5, 1i64..=3, prop::collection::vec(0usize..8, 0..=3)),
                1..6,
            ),
            seed in prop::collection::vec(-1.0f64..1.0, 6),
            seed_t in prop::collection::vec(-1.0f64..1.0, 6),
            axis in 0usize..2,
        ) {
            let vars = order_one_vars(2);
            let mut p = Poly::zero();
            for (num, den, factors) in &terms {
                let mono = factors
                    .iter()
                    .fold(Monomial::one(), |m, &i| m.mul(&Monomial::var(vars[i].clone())));
                p = &p + &Poly::term(rational(*num, *den), mono);
            }
            let core = JetExpr::new(2, 2, vec![p]);
            let g = make_grid(2, 32).unwrap();
            let u = random_field(&g, 2, &seed);
            let ut = random_field(&g, 2, &seed_t);
            let jets = JetValues::with_time_derivative(&u, &ut).unwrap();
            let coord = Coord::X(axis as u8 + 1);
            let lhs = jet_evaluate(&jet_total_derivative(&core, coord), &jets).unwrap();
            let rhs = spectral_derivative(&jet_evaluate(&core, &jets).unwrap(), axis, 1).unwrap();
            let scale = rhs.max_abs().max(1.0);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-8 * scale);
        }
    }
}
