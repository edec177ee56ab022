//! Total derivatives `V_i`, the operators `L = Σ_b V_b V_b` and
//! `W = ∂_η + Σ (△u_I) ∂/∂u_I`, the source `(W − L)F` and the Fréchet
//! coefficients of a first-order core.
//!
//! Expressions carry no explicit dependence on the coordinates, so the
//! explicit `∂_i` and `∂_η` parts of the operators vanish. The product rule on
//! a polynomial raises the maximal order by exactly one per application; no
//! further truncation is needed.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{invalid, Result};

use super::index::{Coord, JetIndex};
use super::poly::Poly;

/// Vector of jet polynomials, one per output component, over `ncomp`
/// dependent variables in `dim` space dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetExpr {
    dim: usize,
    ncomp: usize,
    components: Vec<Poly>,
}

impl JetExpr {
    pub fn new(dim: usize, ncomp: usize, components: Vec<Poly>) -> Self {
        Self {
            dim,
            ncomp,
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of dependent variables `u^1 .. u^N`.
    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &Poly {
        &self.components[a]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn max_order(&self) -> usize {
        self.components.iter().map(Poly::max_order).max().unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<JetIndex> {
        let mut v: Vec<JetIndex> = self.components.iter().flat_map(Poly::variables).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> JetExpr {
        JetExpr::new(self.dim, self.ncomp, self.components.iter().map(f).collect())
    }

    pub fn zip(&self, other: &JetExpr, f: impl Fn(&Poly, &Poly) -> Poly) -> JetExpr {
        debug_assert_eq!(self.len(), other.len());
        JetExpr::new(
            self.dim,
            self.ncomp,
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }
}

impl fmt::Display for JetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.components.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `V_i` on one polynomial.
pub fn total_derivative_poly(p: &Poly, coord: Coord) -> Poly {
    p.derive_with(|idx| Poly::var(idx.with(coord)))
}

/// Total derivative `V_i`: every factor `u^α_I` is replaced in turn by
/// `u^α_{I∪{i}}`.
pub fn jet_total_derivative(expr: &JetExpr, coord: Coord) -> JetExpr {
    expr.map(|p| total_derivative_poly(p, coord))
}

/// `L = Σ_b V_b V_b` over the spatial axes.
pub fn jet_l(expr: &JetExpr) -> JetExpr {
    let dim = expr.dim();
    expr.map(|p| {
        Coord::spatial(dim).fold(Poly::zero(), |acc, x| {
            let twice = total_derivative_poly(&total_derivative_poly(p, x), x);
            &acc + &twice
        })
    })
}

/// `W`: every factor `u^α_I` is replaced in turn by `△u^α_I`, encoded as
/// `Σ_b u^α_{I∪{b,b}}`.
pub fn jet_w(expr: &JetExpr) -> JetExpr {
    let dim = expr.dim();
    expr.map(|p| {
        p.derive_with(|idx| {
            Coord::spatial(dim).fold(Poly::zero(), |acc, x| &acc + &Poly::var(idx.with(x).with(x)))
        })
    })
}

/// Source of the exact residual transport equation, `s = (W − L)F`.
pub fn derive_source(core: &JetExpr) -> JetExpr {
    jet_w(core).zip(&jet_l(core), |w, l| w - l)
}

/// Formal partial derivatives of a first-order core:
/// `C^α_β = ∂F^α/∂u^β` and `C^{αi}_β = ∂F^α/∂u^β_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrechetTable {
    dim: usize,
    ncomp: usize,
    entries: BTreeMap<(usize, usize, Option<Coord>), Poly>,
}

impl FrechetTable {
    /// Coefficient for output `alpha`, variable `beta` and derivative
    /// coordinate `coord` (`None` for the undifferentiated variable).
    pub fn get(&self, alpha: usize, beta: usize, coord: Option<Coord>) -> Poly {
        self.entries
            .get(&(alpha, beta, coord))
            .cloned()
            .unwrap_or_default()
    }

    /// Non-zero entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize, Option<Coord>), &Poly)> {
        self.entries.iter()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    /// Derivative coordinates a first-order core may depend on.
    pub fn coords(&self) -> Vec<Coord> {
        let mut c = vec![Coord::T];
        c.extend(Coord::spatial(self.dim));
        c
    }
}

impl fmt::Display for FrechetTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, ((a, b, c), p)) in self.entries.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            match c {
                None => write!(f, "C[{},{}] = {p}", a + 1, b + 1)?,
                Some(c) => write!(f, "C[{},{};{c}] = {p}", a + 1, b + 1)?,
            }
        }
        Ok(())
    }
}

pub fn jet_frechet(core: &JetExpr) -> Result<FrechetTable> {
    if core.max_order() > 1 {
        return Err(invalid(
            "core",
            format!("Fréchet coefficients need a first-order core, got order {}", core.max_order()),
        ));
    }
    let mut entries = BTreeMap::new();
    let mut coords: Vec<Option<Coord>> = vec![None, Some(Coord::T)];
    coords.extend(Coord::spatial(core.dim()).map(Some));
    for (alpha, f) in core.components().iter().enumerate() {
        for beta in 0..core.ncomp() {
            for c in &coords {
                let idx = match c {
                    None => JetIndex::base(beta),
                    Some(c) => JetIndex::base(beta).with(*c),
                };
                let p = f.partial(&idx);
                if !p.is_zero() {
                    entries.insert((alpha, beta, *c), p);
                }
            }
        }
    }
    Ok(FrechetTable {
        dim: core.dim(),
        ncomp: core.ncomp(),
        entries,
    })
}
