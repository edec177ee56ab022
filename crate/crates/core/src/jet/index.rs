use std::fmt;

/// Coordinate label of a partial derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    T,
    /// Spatial axis, 1-based (`X(1)` is `x1`).
    X(u8),
    Eta,
}

impl Coord {
    pub fn is_spatial(self) -> bool {
        matches!(self, Coord::X(_))
    }

    /// Spatial coordinates `x1 .. x{dim}`.
    pub fn spatial(dim: usize) -> impl Iterator<Item = Coord> {
        (1..=dim as u8).map(Coord::X)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::T => write!(f, "t"),
            Coord::X(a) => write!(f, "x{a}"),
            Coord::Eta => write!(f, "eta"),
        }
    }
}

/// Jet variable `u^α_I`: a component index (0-based) and a sorted multiset
/// of derivative coordinates, so mixed partials in any order compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetIndex {
    component: usize,
    derivs: Vec<Coord>,
}

impl JetIndex {
    pub fn new(component: usize, derivs: impl IntoIterator<Item = Coord>) -> Self {
        let mut derivs: Vec<Coord> = derivs.into_iter().collect();
        derivs.sort();
        Self { component, derivs }
    }

    pub fn base(component: usize) -> Self {
        Self {
            component,
            derivs: Vec::new(),
        }
    }

    pub fn component(&self) -> usize {
        self.component
    }

    pub fn derivs(&self) -> &[Coord] {
        &self.derivs
    }

    pub fn order(&self) -> usize {
        self.derivs.len()
    }

    /// This index with one more derivative.
    pub fn with(&self, c: Coord) -> Self {
        let pos = self.derivs.partition_point(|d| *d <= c);
        let mut derivs = self.derivs.clone();
        derivs.insert(pos, c);
        Self {
            component: self.component,
            derivs,
        }
    }

    pub fn has_eta(&self) -> bool {
        self.derivs.contains(&Coord::Eta)
    }

    /// Splits into the index with spatial derivatives removed and the
    /// per-axis spatial derivative counts.
    pub fn split_spatial(&self) -> (JetIndex, [u32; 2], bool) {
        let mut counts = [0u32; 2];
        let mut overflow = false;
        let rest = self
            .derivs
            .iter()
            .filter(|d| match d {
                Coord::X(a) if (1..=2).contains(a) => {
                    counts[*a as usize - 1] += 1;
                    false
                }
                Coord::X(_) => {
                    overflow = true;
                    false
                }
                _ => true,
            })
            .copied();
        (JetIndex::new(self.component, rest), counts, overflow)
    }

    pub fn max_axis(&self) -> u8 {
        self.derivs
            .iter()
            .filter_map(|d| if let Coord::X(a) = d { Some(*a) } else { None })
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for JetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.component + 1)?;
        if !self.derivs.is_empty() {
            write!(f, "_")?;
            for d in &self.derivs {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}
