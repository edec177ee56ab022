//! Scale propagation by the heat semigroup, scale stacks and scale
//! derivatives.
//!
//! On the torus the Gaussian filter of width `η` acts on mode `k` as the
//! factor `exp(-η|k|²)`, so propagation is exact up to round-off.

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::spectral::{from_spectral, laplacian, to_spectral, Grid, SpectralField};

/// Per-mode heat multipliers for one scale increment.
#[derive(Clone, Debug)]
pub struct HeatPropagator {
    grid: Grid,
    delta_eta: f64,
    multipliers: Vec<f64>,
}

impl HeatPropagator {
    pub fn new(grid: &Grid, delta_eta: f64) -> Result<Self> {
        if !(delta_eta >= 0.0) || !delta_eta.is_finite() {
            return Err(invalid(
                "delta_eta",
                format!("backward or non-finite scale increment {delta_eta} is not allowed"),
            ));
        }
        let multipliers = (0..grid.num_points())
            .map(|i| (-delta_eta * grid.k_squared(i)).exp())
            .collect();
        Ok(Self {
            grid: grid.clone(),
            delta_eta,
            multipliers,
        })
    }

    pub fn delta_eta(&self) -> f64 {
        self.delta_eta
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn apply_spectral(&self, s: &SpectralField) -> SpectralField {
        let mut out = s.apply_symbol(|i| Complex64::new(self.multipliers[i], 0.0));
        out = SpectralField::from_raw(
            out.grid().clone(),
            out.ncomp(),
            out.coeffs().to_vec(),
            s.t(),
            s.eta() + self.delta_eta,
        );
        out
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.grid() != &self.grid {
            return Err(Error::ShapeMismatch("propagator built for another grid".into()));
        }
        if self.delta_eta == 0.0 {
            return Ok(f.clone());
        }
        Ok(from_spectral(&self.apply_spectral(&to_spectral(f))))
    }
}

/// Advances `f` by `delta_eta` in scale: mode `k` is damped by
/// `exp(-delta_eta |k|²)` and the field's scale coordinate grows by
/// `delta_eta`.
pub fn heat_propagate(f: &Field, delta_eta: f64) -> Result<Field> {
    HeatPropagator::new(f.grid(), delta_eta)?.apply(f)
}

/// Fields sampled at uniformly spaced scale nodes `ε, ε+Δη, …`.
#[derive(Clone, Debug)]
pub struct ScaleStack {
    epsilon: f64,
    step: f64,
    fields: Vec<Field>,
}

/// Fewest nodes a stack may have.
pub const MIN_NODES: usize = 5;

impl ScaleStack {
    /// Wraps fields given at nodes `epsilon + j * step`. The scale coordinate
    /// of every field is set to its node value.
    pub fn new(epsilon: f64, step: f64, fields: Vec<Field>) -> Result<Self> {
        if fields.len() < MIN_NODES {
            return Err(invalid(
                "nodes",
                format!("a scale stack needs at least {MIN_NODES} nodes, got {}", fields.len()),
            ));
        }
        if !(epsilon > 0.0) || !(step > 0.0) || !epsilon.is_finite() || !step.is_finite() {
            return Err(invalid(
                "epsilon",
                format!("need epsilon > 0 and step > 0, got {epsilon} and {step}"),
            ));
        }
        let grid = fields[0].grid().clone();
        let ncomp = fields[0].ncomp();
        let t = fields[0].t();
        let mut out = Vec::with_capacity(fields.len());
        for (j, f) in fields.into_iter().enumerate() {
            if f.grid() != &grid || f.ncomp() != ncomp {
                return Err(Error::ShapeMismatch(format!("stack node {j} has a different shape")));
            }
            out.push(f.with_coordinates(t, epsilon + j as f64 * step));
        }
        Ok(Self {
            epsilon,
            step,
            fields: out,
        })
    }

    /// Samples `f(eta)` at `count` nodes.
    pub fn from_fn(
        epsilon: f64,
        step: f64,
        count: usize,
        f: impl Fn(f64) -> Result<Field>,
    ) -> Result<Self> {
        let fields = (0..count)
            .map(|j| f(epsilon + j as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        Self::new(epsilon, step, fields)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Upper scale bound: the last node.
    pub fn eta0(&self) -> f64 {
        self.node(self.len() - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn node(&self, j: usize) -> f64 {
        self.epsilon + j as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }

    pub fn field(&self, j: usize) -> &Field {
        &self.fields[j]
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    /// Applies `f` node by node, keeping the nodes.
    pub fn map(&self, f: impl Fn(&Field) -> Result<Field>) -> Result<ScaleStack> {
        let fields = self.fields.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.epsilon, self.step, fields)
    }

    /// Largest absolute value over all nodes.
    pub fn sup_abs(&self) -> f64 {
        self.fields.iter().map(Field::max_abs).fold(0.0, f64::max)
    }
}

/// Builds a member of the filter-map set by propagating `generator` (the
/// field at scale `epsilon`) to `count` uniform nodes on `[epsilon, eta0]`.
pub fn build_scale_stack(generator: &Field, epsilon: f64, eta0: f64, count: usize) -> Result<ScaleStack> {
    if count < MIN_NODES {
        return Err(invalid("count", format!("need at least {MIN_NODES} nodes, got {count}")));
    }
    if !(epsilon > 0.0 && epsilon < eta0 && eta0 <= 1.0) {
        return Err(invalid(
            "epsilon",
            format!("need 0 < epsilon < eta0 <= 1, got epsilon = {epsilon}, eta0 = {eta0}"),
        ));
    }
    let step = (eta0 - epsilon) / (count - 1) as f64;
    propagate_uniform(generator, epsilon, step, count)
}

/// Like [`build_scale_stack`] but parameterized by the node spacing.
pub fn propagate_uniform(generator: &Field, epsilon: f64, step: f64, count: usize) -> Result<ScaleStack> {
    let grid = generator.grid();
    let base = to_spectral(generator);
    let fields = (0..count)
        .map(|j| {
            let prop = HeatPropagator::new(grid, j as f64 * step)?;
            Ok(from_spectral(&prop.apply_spectral(&base)))
        })
        .collect::<Result<Vec<_>>>()?;
    ScaleStack::new(epsilon, step, fields)
}

/// Centered second-order scale derivative at an interior node.
pub fn eta_derivative(stack: &ScaleStack, node: usize, order: u32) -> Result<Field> {
    if !(1..=2).contains(&order) {
        return Err(invalid("order", format!("scale derivative order must be 1 or 2, got {order}")));
    }
    if node == 0 || node + 1 >= stack.len() {
        return Err(invalid(
            "node",
            format!("node {node} is on the boundary of a {}-node stack", stack.len()),
        ));
    }
    let (lo, mid, hi) = (stack.field(node - 1), stack.field(node), stack.field(node + 1));
    let h = stack.step();
    let mut out = hi - lo;
    if order == 1 {
        out = out.scaled(1.0 / (2.0 * h));
    } else {
        out = hi + lo;
        out.axpy(-2.0, mid);
        out = out.scaled(1.0 / (h * h));
    }
    Ok(out.with_coordinates(mid.t(), mid.eta()))
}

/// `ψ = (∂_η − △) u` at an interior node.
pub fn filter_defect(stack: &ScaleStack, node: usize) -> Result<Field> {
    let d = eta_derivative(stack, node, 1)?;
    Ok(&d - &laplacian(stack.field(node)))
}

/// Filter defect at every interior node, as a stack starting one node
/// above the input's first node.
pub fn filter_defect_stack(stack: &ScaleStack) -> Result<ScaleStack> {
    let fields = (1..stack.len() - 1)
        .map(|j| filter_defect(stack, j))
        .collect::<Result<Vec<_>>>()?;
    ScaleStack::new(stack.node(1), stack.step(), fields)
}

/// Second-order scale derivative at every node: centered in the interior,
/// one-sided `(∓3f₀ ± 4f₁ ∓ f₂)/(2Δη)` at the two ends.
pub fn eta_derivative_all(stack: &ScaleStack) -> Result<Vec<Field>> {
    let k = stack.len();
    let h = stack.step();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let d = if j == 0 || j + 1 == k {
            let (a, b, c, sign) = if j == 0 {
                (stack.field(0), stack.field(1), stack.field(2), 1.0)
            } else {
                (stack.field(k - 1), stack.field(k - 2), stack.field(k - 3), -1.0)
            };
            let mut f = b.scaled(4.0);
            f.axpy(-3.0, a);
            f.axpy(-1.0, c);
            f.scaled(sign / (2.0 * h)).with_coordinates(a.t(), a.eta())
        } else {
            eta_derivative(stack, j, 1)?
        };
        out.push(d);
    }
    Ok(out)
}

/// Filter defect at every node, including both ends.
pub fn filter_defect_all(stack: &ScaleStack) -> Result<ScaleStack> {
    let fields = eta_derivative_all(stack)?
        .into_iter()
        .zip(stack.fields())
        .map(|(d, u)| &d - &laplacian(u))
        .collect();
    ScaleStack::new(stack.epsilon(), stack.step(), fields)
}

/// Trapezoid approximation of `∫_ε^η e^{(η−η̂)△} ψ(η̂) dη̂` with `η` the scale
/// of `target_node`: the deviation of a field with filter defect `ψ` from the
/// filter map that agrees with it at `ε`.
pub fn duhamel_integral(psi_stack: &ScaleStack, target_node: usize) -> Result<Field> {
    if target_node == 0 || target_node >= psi_stack.len() {
        return Err(invalid(
            "target_node",
            format!(
                "need at least 2 nodes in range, target {target_node} of {}",
                psi_stack.len()
            ),
        ));
    }
    let grid = psi_stack.grid();
    let h = psi_stack.step();
    let target = psi_stack.node(target_node);
    let mut acc = SpectralField::zeros(grid, psi_stack.field(0).ncomp());
    for j in 0..=target_node {
        let w = if j == 0 || j == target_node { 0.5 * h } else { h };
        let prop = HeatPropagator::new(grid, target - psi_stack.node(j))?;
        let term = prop.apply_spectral(&to_spectral(psi_stack.field(j)));
        for (a, b) in acc.coeffs_mut().iter_mut().zip(term.coeffs()) {
            *a += b * w;
        }
    }
    let t = psi_stack.field(0).t();
    Ok(from_spectral(&acc).with_coordinates(t, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, spectral_derivative};

    fn sine(grid: &Grid) -> Field {
        Field::from_fn(grid, 1, |_, x| x[0].sin())
    }

    #[test]
    fn zero_increment_is_identity() {
        let g = make_grid(2, 16).unwrap();
        let f = Field::from_fn(&g, 2, |c, x| (x[0] + c as f64 * x[1]).cos());
        let p = heat_propagate(&f, 0.0).unwrap();
        assert_eq!(p.values(), f.values());
    }

    #[test]
    fn sine_decays_exactly() {
        let g = make_grid(1, 64).unwrap();
        let eta = 0.37;
        let p = heat_propagate(&sine(&g), eta).unwrap();
        assert!((p.eta() - eta).abs() < 1e-15);
        for i in 0..64 {
            let x = g.point(i)[0];
            assert!((p.values()[i] - (-eta).exp() * x.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_are_invariant_and_negative_rejected() {
        let g = make_grid(2, 16).unwrap();
        let c = Field::from_fn(&g, 1, |_, _| 2.5);
        for eta in [0.01, 0.5, 3.0] {
            assert!(heat_propagate(&c, eta).unwrap().max_abs_diff(&c) < 1e-14);
        }
        assert!(heat_propagate(&c, -0.1).is_err());
    }

    #[test]
    fn multipliers_monotone() {
        let g = make_grid(2, 16).unwrap();
        let p = HeatPropagator::new(&g, 0.05).unwrap();
        assert_eq!(p.multipliers()[0], 1.0);
        let mut pairs: Vec<(f64, f64)> = (0..g.num_points()).map(|i| (g.k_squared(i), p.multipliers()[i])).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pairs.windows(2) {
            assert!(w[1].1 <= w[0].1);
            assert!(w[1].1 > 0.0 && w[1].1 <= 1.0);
        }
    }

    #[test]
    fn stack_of_sine_is_closed_form() {
        let g = make_grid(1, 32).unwrap();
        let s = build_scale_stack(&sine(&g), 0.01, 0.1, 10).unwrap();
        assert_eq!(s.len(), 10);
        assert!((s.eta0() - 0.1).abs() < 1e-15);
        for j in 0..10 {
            let decay = (-(s.node(j) - 0.01)).exp();
            for i in 0..32 {
                let x = g.point(i)[0];
                assert!((s.field(j).values()[i] - decay * x.sin()).abs() < 1e-12);
            }
        }
        assert!(build_scale_stack(&sine(&g), 0.01, 0.1, 4).is_err());
        assert!(build_scale_stack(&sine(&g), 0.2, 0.1, 10).is_err());
    }

    #[test]
    fn eta_derivative_of_exponential_stack() {
        let g = make_grid(1, 16).unwrap();
        let errs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&h| {
                let s = ScaleStack::from_fn(0.05, h, 5, |eta| {
                    Ok(Field::from_fn(&g, 1, |_, x| (-eta).exp() * x[0].sin()))
                })
                .unwrap();
                let d1 = eta_derivative(&s, 2, 1).unwrap();
                let d2 = eta_derivative(&s, 2, 2).unwrap();
                let exact = Field::from_fn(&g, 1, |_, x| (-s.node(2)).exp() * x[0].sin());
                let e1 = (&d1 + &exact).max_abs();
                let e2 = (&d2 - &exact).max_abs();
                assert!(e1 < h * h && e2 < h * h);
                e1
            })
            .collect();
        assert!((errs[0] / errs[1]).log2() > 1.9);
        let s = ScaleStack::from_fn(0.05, 0.01, 5, |_| Ok(sine(&g))).unwrap();
        assert!(eta_derivative(&s, 2, 1).unwrap().max_abs() < 1e-12);
        assert!(eta_derivative(&s, 0, 1).is_err());
        assert!(eta_derivative(&s, 4, 2).is_err());
    }

    #[test]
    fn filter_defect_cases() {
        let g = make_grid(1, 16).unwrap();
        // constant in eta: psi = -lap sin = sin
        let s = ScaleStack::from_fn(0.05, 0.01, 5, |_| Ok(sine(&g))).unwrap();
        let psi = filter_defect(&s, 2).unwrap();
        assert!(psi.max_abs_diff(&sine(&g)) < 1e-12);
        // perturbing node 2 by g changes psi at node 1 by +g/(2h), node 3 by -g/(2h)
        let bump = Field::from_fn(&g, 1, |_, x| (2.0 * x[0]).cos());
        let mut fields = s.fields().to_vec();
        fields[2] = &fields[2] + &bump;
        let p = ScaleStack::new(0.05, 0.01, fields).unwrap();
        let d1 = &filter_defect(&p, 1).unwrap() - &filter_defect(&s, 1).unwrap();
        let d3 = &filter_defect(&p, 3).unwrap() - &filter_defect(&s, 3).unwrap();
        assert!(d1.max_abs_diff(&bump.scaled(1.0 / 0.02)) < 1e-9);
        assert!(d3.max_abs_diff(&bump.scaled(-1.0 / 0.02)) < 1e-9);
    }

    #[test]
    fn duhamel_simple_cases() {
        let g = make_grid(1, 16).unwrap();
        let zero = ScaleStack::from_fn(0.01, 0.01, 6, |_| Ok(Field::zeros(&g, 1))).unwrap();
        assert!(duhamel_integral(&zero, 5).unwrap().max_abs() < 1e-15);
        let c = ScaleStack::from_fn(0.01, 0.01, 6, |_| Ok(Field::from_fn(&g, 1, |_, _| 3.0))).unwrap();
        let w = duhamel_integral(&c, 5).unwrap();
        assert!((w.values()[7] - 0.05 * 3.0).abs() < 1e-13);
        assert!(duhamel_integral(&c, 0).is_err());
    }

    #[test]
    fn duhamel_manufactured_closed_form() {
        let g = make_grid(1, 16).unwrap();
        let eps = 0.01;
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&m| {
                let h = 0.08 / m as f64;
                let s = ScaleStack::from_fn(eps, h, m + 1, |eta| {
                    Ok(Field::from_fn(&g, 1, |_, x| (-eta).exp() * x[0].sin()))
                })
                .unwrap();
                let w = duhamel_integral(&s, m).unwrap();
                let eta = s.node(m);
                let exact = Field::from_fn(&g, 1, |_, x| (eta - eps) * (-eta).exp() * x[0].sin());
                w.max_abs_diff(&exact)
            })
            .collect();
        // integrand is constant in eta-hat for this mode: trapezoid is exact
        assert!(errs.iter().all(|e| *e < 1e-13));
    }

    #[test]
    fn propagation_commutes_with_derivatives() {
        let g = make_grid(2, 16).unwrap();
        let f = Field::from_fn(&g, 1, |_, x| (x[0] + 2.0 * x[1]).sin() + (3.0 * x[0]).cos());
        let a = heat_propagate(&spectral_derivative(&f, 1, 1).unwrap(), 0.03).unwrap();
        let b = spectral_derivative(&heat_propagate(&f, 0.03).unwrap(), 1, 1).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn one_sided_scale_derivatives() {
        let g = make_grid(1, 16).unwrap();
        let stack = ScaleStack::from_fn(0.1, 0.01, 6, |eta| Ok(sine(&g).scaled(eta * eta))).unwrap();
        let d = eta_derivative_all(&stack).unwrap();
        for (j, dj) in d.iter().enumerate() {
            let expected = sine(&g).scaled(2.0 * stack.node(j));
            assert!(dj.max_abs_diff(&expected) < 1e-12, "node {j}");
        }
        let psi = filter_defect_all(&stack).unwrap();
        assert_eq!(psi.len(), 6);
        let expected = sine(&g).scaled(2.0 * 0.1 + 0.01);
        assert!(psi.field(0).max_abs_diff(&expected) < 1e-12);
    }
}
