//! Polynomial jet calculus: jet variables, canonical polynomials, total
//! derivatives and the scale-transport operators built from them.

mod eval;
mod index;
mod ops;
mod parse;
mod poly;

pub use eval::{jet_evaluate, JetValues};
pub use index::{Coord, JetIndex};
pub use ops::{
    derive_source, jet_frechet, jet_l, jet_total_derivative, jet_w, total_derivative_poly, FrechetTable, JetExpr,
};
pub use parse::{parse_core, parse_core_with_dim, print_core};
pub use poly::{rational, Monomial, Poly};
