//! Exact residuals `r = F(u, u_i)`, the transport defect
//! `e = (∂_η − △)r − s`, the Helmholtz closure `△r − r/η + s = 0` and the
//! a-priori bound on the closure error.

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::fluid::CoreFunction;
use crate::heat::{eta_derivative, ScaleStack};
use crate::jet::{jet_evaluate, jet_frechet, Coord, JetExpr, JetIndex, JetValues};
use crate::spectral::{from_spectral, laplacian, to_spectral, truncate_values};

/// Residual, source and (when a stack is available) defect at one slice.
#[derive(Clone, Debug)]
pub struct ResidualSet {
    pub r: Field,
    pub s: Field,
    pub e: Option<Field>,
}

/// `r = F(u, u_i)` evaluated from the core's symbolic form.
pub fn exact_residual(core: &CoreFunction, jets: &JetValues) -> Result<Field> {
    jet_evaluate(core.symbolic(), jets)
}

/// `s = (W − L)F` evaluated on the same jets.
pub fn residual_source(core: &CoreFunction, jets: &JetValues) -> Result<Field> {
    jet_evaluate(&core.source(), jets)
}

/// `e = ∂_η r − △r − s` at an interior node of a residual stack.
pub fn residual_defect(r_stack: &ScaleStack, s_at_node: &Field, node: usize) -> Result<Field> {
    let d = eta_derivative(r_stack, node, 1)?;
    let r = r_stack.field(node);
    if s_at_node.grid() != r.grid() || s_at_node.ncomp() != r.ncomp() {
        return Err(Error::ShapeMismatch("residual_defect: source and residual differ in shape".into()));
    }
    Ok(&(&d - &laplacian(r)) - s_at_node)
}

/// Jets `u^α` and `u^α_t` at one node of a pair of stacks.
pub fn node_jets(u_stack: &ScaleStack, u_t_stack: &ScaleStack, node: usize) -> Result<JetValues> {
    JetValues::with_time_derivative(u_stack.field(node), u_t_stack.field(node))
}

/// Residual at every node of a stack of states.
pub fn residual_stack(core: &CoreFunction, u_stack: &ScaleStack, u_t_stack: &ScaleStack) -> Result<ScaleStack> {
    if u_stack.len() != u_t_stack.len() {
        return Err(Error::ShapeMismatch("state and time-derivative stacks differ in length".into()));
    }
    let fields = (0..u_stack.len())
        .map(|j| exact_residual(core, &node_jets(u_stack, u_t_stack, j)?))
        .collect::<Result<Vec<_>>>()?;
    ScaleStack::new(u_stack.epsilon(), u_stack.step(), fields)
}

/// Residual, source and defect at an interior node.
pub fn residual_set(
    core: &CoreFunction,
    u_stack: &ScaleStack,
    u_t_stack: &ScaleStack,
    node: usize,
) -> Result<ResidualSet> {
    let r_stack = residual_stack(core, u_stack, u_t_stack)?;
    let jets = node_jets(u_stack, u_t_stack, node)?;
    let s = residual_source(core, &jets)?;
    let e = residual_defect(&r_stack, &s, node)?;
    Ok(ResidualSet {
        r: r_stack.field(node).clone(),
        s,
        e: Some(e),
    })
}

/// Solves `△r − r/η + s = 0` mode by mode: `r̂ = ŝ/(|k|² + 1/η)`.
pub fn solve_residual_closure(s: &Field, eta: f64) -> Result<Field> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid("eta", format!("closure scale must be positive, got {eta}")));
    }
    let grid = s.grid().clone();
    let inv = 1.0 / eta;
    let r = to_spectral(s).apply_symbol(|i| Complex64::new(1.0 / (grid.k_squared(i) + inv), 0.0));
    Ok(from_spectral(&r))
}

/// `max|△r − r/η + s|`, the back-substitution residual of the closure.
pub fn closure_residual(r: &Field, s: &Field, eta: f64) -> f64 {
    let lap = laplacian(r);
    lap.values()
        .iter()
        .zip(r.values())
        .zip(s.values())
        .fold(0.0f64, |m, ((l, r), s)| m.max((l - r / eta + s).abs()))
}

/// Both sides of `max|∂_η r − r/η| ≤ (η/2)·sup|∂²_η r|` at an interior
/// node, with the supremum taken over every interior node of the stack.
pub fn closure_error_bound(r_stack: &ScaleStack, node: usize) -> Result<(f64, f64)> {
    let eta = r_stack.node(node);
    let d1 = eta_derivative(r_stack, node, 1)?;
    let r = r_stack.field(node);
    let lhs = d1
        .values()
        .iter()
        .zip(r.values())
        .fold(0.0f64, |m, (d, r)| m.max((d - r / eta).abs()));
    let mut sup = 0.0f64;
    for j in 1..r_stack.len() - 1 {
        sup = sup.max(eta_derivative(r_stack, j, 2)?.max_abs());
    }
    Ok((lhs, 0.5 * eta * sup))
}

/// Contracts the Fréchet coefficients of a first-order core, evaluated on
/// the jets of `u`, with the jets of `ψ`:
/// `Σ_β Σ_i C^{αi}_β ψ^β_i + C^α_β ψ^β`.
pub fn frechet_contraction(core: &JetExpr, u_jets: &JetValues, psi_jets: &JetValues) -> Result<Field> {
    let table = jet_frechet(core)?;
    let grid = u_jets.grid().clone();
    let n = grid.num_points();
    let mut linear = vec![vec![0.0; n]; core.len()];
    let mut nonlinear = vec![vec![0.0; n]; core.len()];
    for (&(alpha, beta, coord), poly) in table.entries() {
        let idx = match coord {
            None => JetIndex::base(beta),
            Some(c) => JetIndex::base(beta).with(c),
        };
        let psi = psi_jets.resolve(&idx)?;
        let coeff = jet_evaluate(&JetExpr::new(core.dim(), core.ncomp(), vec![poly.clone()]), u_jets)?;
        if poly.degree() == 0 {
            for (o, (c, p)) in linear[alpha].iter_mut().zip(coeff.values().iter().zip(psi.values())) {
                *o += c * p;
            }
        } else {
            let tc = truncate_values(&grid, coeff.values());
            let tp = truncate_values(&grid, psi.values());
            for (o, (c, p)) in nonlinear[alpha].iter_mut().zip(tc.iter().zip(&tp)) {
                *o += c * p;
            }
        }
    }
    let mut out = Vec::with_capacity(n * core.len());
    for (lin, non) in linear.into_iter().zip(nonlinear) {
        let t = truncate_values(&grid, &non);
        out.extend(lin.iter().zip(t).map(|(a, b)| a + b));
    }
    let t = u_jets.resolve(&JetIndex::base(0)).map(|f| (f.t(), f.eta())).unwrap_or((0.0, 0.0));
    Field::new(&grid, core.len(), out, t.0, t.1)
}

/// Jets of `ψ` from its value and time derivative.
pub fn psi_jets(psi: &Field, psi_t: &Field) -> Result<JetValues> {
    let mut j = JetValues::from_field(psi);
    j.insert_components(psi_t, Coord::T)?;
    Ok(j)
}
