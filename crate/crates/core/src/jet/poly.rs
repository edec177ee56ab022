//! Canonical sparse polynomials over jet variables with exact rational
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::index::JetIndex;

/// Product of jet variables with positive integer powers.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<JetIndex, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(index: JetIndex) -> Self {
        Self(BTreeMap::from([(index, 1)]))
    }

    pub fn factors(&self) -> impl Iterator<Item = (&JetIndex, u32)> {
        self.0.iter().map(|(i, p)| (i, *p))
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn power_of(&self, index: &JetIndex) -> u32 {
        self.0.get(index).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (i, p) in &other.0 {
            *out.entry(i.clone()).or_insert(0) += p;
        }
        Monomial(out)
    }

    /// Removes one power of `index`; `None` if absent.
    fn without_one(&self, index: &JetIndex) -> Option<Monomial> {
        let p = *self.0.get(index)?;
        let mut out = self.0.clone();
        if p == 1 {
            out.remove(index);
        } else {
            out.insert(index.clone(), p - 1);
        }
        Some(Monomial(out))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, p) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{i}")?;
            if *p > 1 {
                write!(f, "^{p}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial in jet variables. Zero coefficients are never stored, so
/// equal polynomials have identical term maps.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly(BTreeMap<Monomial, BigRational>);

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(index: JetIndex) -> Self {
        Self::term(BigRational::one(), Monomial::var(index))
    }

    pub fn term(coeff: BigRational, mono: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(mono, coeff);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.0.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.0.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, k)| (m.clone(), k * c)).collect())
    }

    /// Every jet variable appearing in the polynomial.
    pub fn variables(&self) -> Vec<JetIndex> {
        let mut vars: Vec<JetIndex> = self
            .0
            .keys()
            .flat_map(|m| m.factors().map(|(i, _)| i.clone()))
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    /// Highest derivative order among the variables, 0 for constants.
    pub fn max_order(&self) -> usize {
        self.variables().iter().map(JetIndex::order).max().unwrap_or(0)
    }

    /// Largest total degree of any monomial.
    pub fn degree(&self) -> u32 {
        self.0.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Formal partial derivative with respect to one jet variable.
    pub fn partial(&self, index: &JetIndex) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let p = m.power_of(index);
            if p == 0 {
                continue;
            }
            let rest = m.without_one(index).expect("power checked");
            out.add_term(rest, c * BigRational::from_integer(BigInt::from(p)));
        }
        out
    }

    /// Applies the derivation `Σ_I image(I) ∂/∂u_I`: every occurrence of a
    /// variable is replaced in turn by its image (product rule).
    pub fn derive_with(&self, image: impl Fn(&JetIndex) -> Poly) -> Poly {
        let mut out = Poly::zero();
        for var in self.variables() {
            let dp = self.partial(&var);
            let img = image(&var);
            if img.is_zero() {
                continue;
            }
            out = &out + &(&dp * &img);
        }
        out
    }

    pub fn to_f64_coeffs(&self) -> Vec<(&Monomial, f64)> {
        self.0
            .iter()
            .map(|(m, c)| (m, c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.0 {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &rhs.0 {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.0.iter().enumerate() {
            let negative = c.is_negative();
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            if m.is_one() {
                write_rational(f, &mag)?;
            } else {
                if !mag.is_one() {
                    write_rational(f, &mag)?;
                    write!(f, "*")?;
                }
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}
