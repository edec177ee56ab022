//! Ideal-fluid core: continuity and momentum for `u = (v, p)`, the velocity
//! gradient Gram tensor `σ`, the closed-form source `−2∇·σ`, acceleration
//! and the Leray split into solenoidal and gradient parts.
//!
//! Velocity occupies components `0..n` of a state field and pressure the
//! last one. Quadratic terms are dealiased: factors are truncated, summed
//! products truncated once.

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{Field, TensorField};
use crate::jet::{derive_source, parse_core_with_dim, JetExpr, JetIndex, JetValues};
use crate::spectral::{
    derivative_symbol, from_spectral, spectral_derivative_unchecked, to_spectral, truncate_values,
    SpectralField,
};

/// Tolerance on `max|∇·v|` for states that must be solenoidal.
pub const DIVERGENCE_TOL: f64 = 1e-10;

/// Above this divergence the divergence form of the source is unreliable.
pub const SOURCE_DIVERGENCE_WARN: f64 = 1e-8;

/// `F^a = v^a_t + Σ_c v^c v^a_c + p_a`, `F^{n+1} = Σ_c v^c_c`.
pub fn fluid_core_expr(dim: usize) -> JetExpr {
    let p = dim + 1;
    let mut text = String::new();
    for a in 1..=dim {
        text.push_str(&format!("u{a}_t + u{p}_x{a}"));
        for c in 1..=dim {
            text.push_str(&format!(" + u{c}*u{a}_x{c}"));
        }
        text.push('\n');
    }
    let div: Vec<String> = (1..=dim).map(|c| format!("u{c}_x{c}")).collect();
    text.push_str(&div.join(" + "));
    parse_core_with_dim(&text, dim).expect("fluid core text is well formed")
}

/// Inviscid Burgers `u_t + u u_x`.
pub fn burgers_core_expr() -> JetExpr {
    parse_core_with_dim("u1_t + u1*u1_x1", 1).expect("burgers core text is well formed")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreKind {
    Fluid,
    Burgers,
}

/// A named core with its symbolic form and a direct numeric evaluator.
#[derive(Clone, Debug)]
pub struct CoreFunction {
    kind: CoreKind,
    dim: usize,
    symbolic: JetExpr,
}

impl CoreFunction {
    pub fn fluid(dim: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(invalid("dim", "fluid core needs dimension 1 or 2"));
        }
        Ok(Self {
            kind: CoreKind::Fluid,
            dim,
            symbolic: fluid_core_expr(dim),
        })
    }

    pub fn burgers() -> Self {
        Self {
            kind: CoreKind::Burgers,
            dim: 1,
            symbolic: burgers_core_expr(),
        }
    }

    /// Looks up `"fluid"` or `"burgers"`.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "fluid" => Self::fluid(dim),
            "burgers" if dim == 1 => Ok(Self::burgers()),
            "burgers" => Err(invalid("core", "the burgers core is one-dimensional")),
            other => Err(invalid("core", format!("unknown core `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            CoreKind::Fluid => "fluid",
            CoreKind::Burgers => "burgers",
        }
    }

    pub fn kind(&self) -> CoreKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of components `N`.
    pub fn ncomp(&self) -> usize {
        self.symbolic.ncomp()
    }

    pub fn symbolic(&self) -> &JetExpr {
        &self.symbolic
    }

    pub fn required_order(&self) -> usize {
        self.symbolic.max_order()
    }

    /// Symbolic source `(W − L)F`.
    pub fn source(&self) -> JetExpr {
        derive_source(&self.symbolic)
    }

    /// Direct evaluation of the core from the jets `u^α` and `u^α_t`.
    pub fn evaluate(&self, jets: &JetValues) -> Result<Field> {
        let n = self.ncomp();
        let base: Vec<Field> = (0..n)
            .map(|c| jets.resolve(&JetIndex::base(c)))
            .collect::<Result<_>>()?;
        let time: Vec<Field> = (0..self.velocity_components())
            .map(|c| jets.resolve(&JetIndex::base(c).with(crate::jet::Coord::T)))
            .collect::<Result<_>>()?;
        let refs: Vec<&Field> = base.iter().collect();
        let u = Field::stack(&refs)?;
        let trefs: Vec<&Field> = time.iter().collect();
        let u_t = Field::stack(&trefs)?;
        match self.kind {
            CoreKind::Fluid => Ok(fluid_core_values(&u.slice(0..self.dim), &u.extract(self.dim), &u_t)),
            CoreKind::Burgers => Ok(&u_t + &advect(&u, &u)),
        }
    }

    fn velocity_components(&self) -> usize {
        match self.kind {
            CoreKind::Fluid => self.dim,
            CoreKind::Burgers => 1,
        }
    }
}

/// `Σ_a ∂_a v^a`.
pub fn divergence(v: &Field) -> Field {
    let grid = v.grid().clone();
    let s = to_spectral(v);
    let n = grid.num_points();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..grid.dim().min(v.ncomp()) {
        for (i, (out, c)) in acc.iter_mut().zip(s.component(a)).enumerate() {
            *out += derivative_symbol(&grid, i, a, 1) * c;
        }
    }
    Field::from_raw(grid.clone(), 1, grid.inverse(&acc), v.t(), v.eta())
}

pub fn max_divergence(v: &Field) -> f64 {
    divergence(v).max_abs()
}

/// Gradient of a scalar field, one component per axis.
pub fn gradient(p: &Field) -> Field {
    let dim = p.grid().dim();
    let parts: Vec<Field> = (0..dim).map(|a| spectral_derivative_unchecked(p, a, 1)).collect();
    let refs: Vec<&Field> = parts.iter().collect();
    Field::stack(&refs).expect("gradient components share one grid")
}

/// Dealiased transport term `(a·∇)b`, one component per component of `b`.
pub fn advect(a: &Field, b: &Field) -> Field {
    let grid = a.grid().clone();
    let dim = grid.dim();
    let n = grid.num_points();
    let ta: Vec<Vec<f64>> = (0..dim).map(|c| truncate_values(&grid, a.component(c))).collect();
    let mut out = Vec::with_capacity(n * b.ncomp());
    for i in 0..b.ncomp() {
        let sb = grid.forward(b.component(i));
        let mut acc = vec![0.0; n];
        for (c, tac) in ta.iter().enumerate() {
            let d: Vec<Complex64> = sb
                .iter()
                .enumerate()
                .map(|(m, z)| {
                    if grid.is_retained(m) {
                        derivative_symbol(&grid, m, c, 1) * z
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let db = grid.inverse(&d);
            for ((o, x), y) in acc.iter_mut().zip(tac).zip(&db) {
                *o += x * y;
            }
        }
        out.extend(truncate_values(&grid, &acc));
    }
    Field::from_raw(grid, b.ncomp(), out, b.t(), b.eta())
}

/// Velocity gradient Gram tensor `σ^{ab} = Σ_c ∂_c v^a ∂_c v^b`.
pub fn sigma(v: &Field) -> Result<TensorField> {
    let grid = v.grid().clone();
    let dim = grid.dim();
    if v.ncomp() != dim {
        return Err(Error::ShapeMismatch(format!(
            "sigma expects {dim} velocity components, got {}",
            v.ncomp()
        )));
    }
    let grads = velocity_gradients(v);
    let n = grid.num_points();
    let mut pairs = Vec::new();
    for a in 0..dim {
        for b in a..dim {
            let mut acc = vec![0.0; n];
            for c in 0..dim {
                for ((o, x), y) in acc.iter_mut().zip(&grads[a][c]).zip(&grads[b][c]) {
                    *o += x * y;
                }
            }
            pairs.push(truncate_values(&grid, &acc));
        }
    }
    Ok(TensorField::from_pairs(&grid, pairs, v.t(), v.eta()))
}

/// Truncated `∂_c v^a`, indexed `[a][c]`.
fn velocity_gradients(v: &Field) -> Vec<Vec<Vec<f64>>> {
    let grid = v.grid();
    let dim = grid.dim();
    (0..dim)
        .map(|a| {
            let s = grid.forward(v.component(a));
            (0..dim)
                .map(|c| {
                    let d: Vec<Complex64> = s
                        .iter()
                        .enumerate()
                        .map(|(m, z)| {
                            if grid.is_retained(m) {
                                derivative_symbol(grid, m, c, 1) * z
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        })
                        .collect();
                    grid.inverse(&d)
                })
                .collect()
        })
        .collect()
}

/// Source of the fluid residual transport, `s^a = −2 Σ_b ∂_b σ^{ab}` and a
/// zero pressure component.
pub fn fluid_source(v: &Field) -> Result<Field> {
    let div = max_divergence(v);
    if div > SOURCE_DIVERGENCE_WARN {
        log::warn!("fluid_source: velocity divergence {div:.3e} exceeds {SOURCE_DIVERGENCE_WARN:e}");
    }
    let sig = sigma(v)?;
    let grid = v.grid().clone();
    let dim = grid.dim();
    let n = grid.num_points();
    let mut out = Vec::with_capacity(n * (dim + 1));
    for a in 0..dim {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..dim {
            let sh = grid.forward(sig.get(a, b));
            for (i, (o, z)) in acc.iter_mut().zip(&sh).enumerate() {
                *o += derivative_symbol(&grid, i, b, 1) * z;
            }
        }
        out.extend(grid.inverse(&acc).into_iter().map(|x| -2.0 * x));
    }
    out.extend(std::iter::repeat_n(0.0, n));
    Ok(Field::from_raw(grid, dim + 1, out, v.t(), v.eta()))
}

/// `a = v_t + (v·∇)v`.
pub fn acceleration(v: &Field, v_t: &Field) -> Result<Field> {
    if v.grid() != v_t.grid() || v.ncomp() != v_t.ncomp() {
        return Err(Error::ShapeMismatch("acceleration: v and v_t differ in shape".into()));
    }
    Ok(v_t + &advect(v, v))
}

/// Splits `w = solenoidal + ∇φ` mode by mode, with `φ` of zero mean.
pub fn leray_project(w: &Field) -> Result<(Field, Field)> {
    let grid = w.grid().clone();
    if w.ncomp() != grid.dim() {
        return Err(Error::ShapeMismatch(format!(
            "leray_project expects {} components, got {}",
            grid.dim(),
            w.ncomp()
        )));
    }
    let (sol, pot) = leray_spectral(&to_spectral(w));
    Ok((from_spectral(&sol), from_spectral(&pot)))
}

pub(crate) fn leray_spectral(w: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = w.grid().clone();
    let dim = grid.dim();
    let n = grid.num_points();
    let mut sol = w.clone();
    let mut pot = SpectralField::from_raw(grid.clone(), 1, vec![Complex64::new(0.0, 0.0); n], w.t(), w.eta());
    for i in 0..n {
        let kt = grid.odd_wavevector(i);
        let kk: f64 = kt[..dim].iter().map(|k| k * k).sum();
        if kk == 0.0 {
            continue;
        }
        let dot: Complex64 = (0..dim).map(|a| w.component(a)[i] * kt[a]).sum();
        for a in 0..dim {
            sol.component_mut(a)[i] -= dot * (kt[a] / kk);
        }
        pot.component_mut(0)[i] = Complex64::new(0.0, -1.0) * dot / kk;
    }
    (sol, pot)
}

/// Solenoidal part only.
pub fn project(w: &Field) -> Result<Field> {
    Ok(leray_project(w)?.0)
}

fn fluid_core_values(v: &Field, p: &Field, v_t: &Field) -> Field {
    let momentum = &(v_t + &advect(v, v)) + &gradient(p);
    let div = divergence(v);
    Field::stack(&[&momentum, &div]).expect("fluid core parts share one grid")
}

/// Velocity and pressure on one slice.
#[derive(Clone, Debug)]
pub struct FluidState {
    v: Field,
    p: Field,
}

impl FluidState {
    /// Checks continuity and shifts `p` to zero mean.
    pub fn new(v: Field, p: Field) -> Result<Self> {
        let dim = v.grid().dim();
        if v.ncomp() != dim || p.ncomp() != 1 || p.grid() != v.grid() {
            return Err(Error::ShapeMismatch(format!(
                "fluid state needs {dim} velocity components and a scalar pressure on one grid"
            )));
        }
        let div = max_divergence(&v);
        if div > DIVERGENCE_TOL {
            return Err(invalid("v", format!("velocity divergence {div:.3e} exceeds {DIVERGENCE_TOL:e}")));
        }
        let mean = p.mean(0);
        let p = Field::new(
            p.grid(),
            1,
            p.values().iter().map(|x| x - mean).collect(),
            p.t(),
            p.eta(),
        )?;
        Ok(Self { v, p })
    }

    pub fn v(&self) -> &Field {
        &self.v
    }

    pub fn p(&self) -> &Field {
        &self.p
    }

    /// `(v, p)` stacked into one field of `n + 1` components.
    pub fn to_field(&self) -> Field {
        Field::stack(&[&self.v, &self.p]).expect("state parts share one grid")
    }
}

/// `F_(v) = v_t + v·∇v + ∇p` and `F_(p) = ∇·v`.
pub fn fluid_core_eval(state: &FluidState, v_t: &Field) -> Result<Field> {
    if v_t.grid() != state.v.grid() || v_t.ncomp() != state.v.ncomp() {
        return Err(Error::ShapeMismatch("fluid_core_eval: v_t shape".into()));
    }
    Ok(fluid_core_values(&state.v, &state.p, v_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{random_stream_velocity, taylor_green, taylor_green_state, TimeProfile};
    use crate::jet::jet_evaluate;
    use crate::spectral::{make_grid, spectral_derivative};

    fn tg(grid: &crate::spectral::Grid) -> Field {
        taylor_green(TimeProfile::STEADY).field(grid, 0.0, 0.0)
    }

    /// Centered fourth-order differences, independent of the FFT.
    fn fd(f: &[f64], grid: &crate::spectral::Grid, axis: usize) -> Vec<f64> {
        let n = grid.size();
        let h = grid.spacing();
        let at = |i: usize, j: usize| f[i % n + n * (j % n)];
        let mut out = vec![0.0; f.len()];
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = if axis == 0 {
                    (at(i + n - 2, j), at(i + n - 1, j), at(i + 1, j), at(i + 2, j))
                } else {
                    (at(i, j + n - 2), at(i, j + n - 1), at(i, j + 1), at(i, j + 2))
                };
                out[i + n * j] = (a - 8.0 * b + 8.0 * c - d) / (12.0 * h);
            }
        }
        out
    }

    #[test]
    fn core_expression_shape() {
        let core = fluid_core_expr(2);
        assert_eq!(core.ncomp(), 3);
        assert_eq!(core.max_order(), 1);
        assert_eq!(core.component(2).to_string(), "u1_x1 + u2_x2");
        assert_eq!(
            core.component(0).to_string(),
            "u1*u1_x1 + u1_t + u1_x2*u2 + u3_x1"
        );
        assert_eq!(burgers_core_expr().to_string(), "u1*u1_x1 + u1_t");
    }

    #[test]
    fn sigma_of_taylor_green() {
        let g = make_grid(2, 32).unwrap();
        let v = tg(&g);
        let s = sigma(&v).unwrap();
        // oracle: finite-difference gradients, products formed pointwise
        let grads: Vec<Vec<Vec<f64>>> = (0..2)
            .map(|a| (0..2).map(|c| fd(v.component(a), &g, c)).collect())
            .collect();
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            let oracle: Vec<f64> = (0..g.num_points())
                .map(|i| (0..2).map(|c| grads[a][c][i] * grads[b][c][i]).sum())
                .collect();
            let err = s.get(a, b).iter().zip(&oracle).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err < 1e-4, "({a},{b}) {err}");
        }
        let closed = Field::from_fn(&g, 1, |_, x| 0.5 * (2.0 * x[0]).sin() * (2.0 * x[1]).sin());
        assert!(s.component(0, 1).max_abs_diff(&closed) < 1e-12);
        let closed = Field::from_fn(&g, 1, |_, x| 0.5 * (1.0 + (2.0 * x[0]).cos() * (2.0 * x[1]).cos()));
        assert!(s.component(0, 0).max_abs_diff(&closed) < 1e-12);
        assert!(s.component(1, 1).max_abs_diff(&closed) < 1e-12);
        assert!(s.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn trivial_sigma_and_source() {
        let g = make_grid(2, 16).unwrap();
        assert_eq!(sigma(&Field::zeros(&g, 2)).unwrap().max_abs(), 0.0);
        let c = Field::from_fn(&g, 2, |c, _| 1.0 + c as f64);
        assert!(sigma(&c).unwrap().max_abs() < 1e-14);
        assert_eq!(fluid_source(&Field::zeros(&g, 2)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn taylor_green_source_vanishes() {
        let g = make_grid(2, 32).unwrap();
        let v = tg(&g);
        let s = fluid_source(&v).unwrap();
        assert_eq!(s.ncomp(), 3);
        assert!(s.max_abs() < 1e-12);
        let sym = jet_evaluate(&derive_source(&fluid_core_expr(2)), &JetValues::from_field(&v)).unwrap();
        assert!(sym.slice(0..3).max_abs() < 1e-12);
    }

    #[test]
    fn source_agrees_with_symbolic_form() {
        let g = make_grid(2, 32).unwrap();
        for seed in 0..4 {
            let v = random_stream_velocity(seed, 6, 4, 1.0, TimeProfile::STEADY, |k2| k2).field(&g, 0.0, 0.0);
            let p = Field::zeros(&g, 1);
            let u = Field::stack(&[&v, &p]).unwrap();
            let closed = fluid_source(&v).unwrap();
            let sym = jet_evaluate(&derive_source(&fluid_core_expr(2)), &JetValues::from_field(&u)).unwrap();
            assert!(closed.max_abs() > 1e-2);
            assert!(closed.max_abs_diff(&sym) < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn acceleration_cases() {
        let g = make_grid(2, 32).unwrap();
        let c = Field::from_fn(&g, 2, |c, _| 0.5 - c as f64);
        assert!(acceleration(&c, &Field::zeros(&g, 2)).unwrap().max_abs() < 1e-14);
        let gt = Field::from_fn(&g, 2, |c, x| (x[c]).sin());
        assert!(acceleration(&Field::zeros(&g, 2), &gt).unwrap().max_abs_diff(&gt) < 1e-15);
        let a = acceleration(&tg(&g), &Field::zeros(&g, 2)).unwrap();
        let expected = Field::from_fn(&g, 2, |c, x| 0.5 * (2.0 * x[c]).sin());
        assert!(a.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn leray_cases() {
        let g = make_grid(2, 32).unwrap();
        let v = tg(&g);
        let (sol, pot) = leray_project(&v).unwrap();
        assert!(sol.max_abs_diff(&v) < 1e-13);
        assert!(pot.max_abs() < 1e-13);
        let grad = Field::from_fn(&g, 2, |c, x| if c == 0 { -x[0].sin() } else { 0.0 });
        let (sol, pot) = leray_project(&grad).unwrap();
        assert!(sol.max_abs() < 1e-13);
        let cos = Field::from_fn(&g, 1, |_, x| x[0].cos());
        assert!(pot.max_abs_diff(&cos) < 1e-13);
    }

    #[test]
    fn leray_general_field() {
        let g = make_grid(2, 16).unwrap();
        let w = Field::from_fn(&g, 2, |c, x| {
            (3.0 * x[0] + x[1] + c as f64).sin() + (8.0 * x[1]).cos() * (1.0 + c as f64) + 0.3 * x[0].cos()
        });
        let (sol, pot) = leray_project(&w).unwrap();
        assert!(max_divergence(&sol) < 1e-10);
        assert!(pot.mean(0).abs() < 1e-14);
        let back = &sol + &gradient(&pot);
        assert!(back.max_abs_diff(&w) < 1e-12);
        let (again, _) = leray_project(&sol).unwrap();
        assert!(again.max_abs_diff(&sol) < 1e-12);
    }

    #[test]
    fn steady_taylor_green_core_vanishes() {
        let g = make_grid(2, 32).unwrap();
        let fam = taylor_green_state(TimeProfile::STEADY);
        let u = fam.field(&g, 0.0, 0.0);
        let state = FluidState::new(u.slice(0..2), u.extract(2)).unwrap();
        let f = fluid_core_eval(&state, &Field::zeros(&g, 2)).unwrap();
        assert!(f.max_abs() < 1e-12);
        let zero = FluidState::new(Field::zeros(&g, 2), Field::zeros(&g, 1)).unwrap();
        assert_eq!(fluid_core_eval(&zero, &Field::zeros(&g, 2)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn filtered_taylor_green_core() {
        let g = make_grid(2, 32).unwrap();
        let prof = TimeProfile::oscillating(1.3);
        let fam = taylor_green_state(prof);
        let (t, eta) = (0.7, 0.15);
        let u = fam.field(&g, t, eta);
        let state = FluidState::new(u.slice(0..2), u.extract(2)).unwrap();
        let vt = fam.time_derivative(&g, t, eta).slice(0..2);
        let f = fluid_core_eval(&state, &vt).unwrap();
        let expected = &vt;
        assert!(f.slice(0..2).max_abs_diff(expected) < 1e-12);
        assert!(f.extract(2).max_abs() < 1e-12);
        let jets = JetValues::with_time_derivative(&u, &fam.time_derivative(&g, t, eta)).unwrap();
        let sym = jet_evaluate(&fluid_core_expr(2), &jets).unwrap();
        assert!(sym.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn numeric_evaluator_matches_symbolic() {
        let g = make_grid(2, 16).unwrap();
        let core = CoreFunction::fluid(2).unwrap();
        let u = Field::from_fn(&g, 3, |c, x| (x[0] * (1 + c) as f64 + 2.0 * x[1]).sin() + 0.2 * c as f64);
        let ut = Field::from_fn(&g, 3, |c, x| (x[1] - c as f64 * x[0]).cos());
        let jets = JetValues::with_time_derivative(&u, &ut).unwrap();
        let direct = core.evaluate(&jets).unwrap();
        let sym = jet_evaluate(core.symbolic(), &jets).unwrap();
        assert!(direct.max_abs_diff(&sym) < 1e-10);
        let b = CoreFunction::burgers();
        let g1 = make_grid(1, 32).unwrap();
        let u = Field::from_fn(&g1, 1, |_, x| x[0].sin() + 0.3 * (3.0 * x[0]).cos());
        let jets = JetValues::with_time_derivative(&u, &u.scaled(0.5)).unwrap();
        let direct = b.evaluate(&jets).unwrap();
        let sym = jet_evaluate(b.symbolic(), &jets).unwrap();
        assert!(direct.max_abs_diff(&sym) < 1e-10);
    }

    #[test]
    fn heat_propagation_keeps_continuity() {
        let g = make_grid(2, 32).unwrap();
        let v = random_stream_velocity(11, 8, 5, 1.0, TimeProfile::STEADY, |k2| k2).field(&g, 0.0, 0.0);
        let w = crate::heat::heat_propagate(&v, 0.3).unwrap();
        assert!(max_divergence(&w) < 1e-10);
        let d = spectral_derivative(&w.extract(0), 0, 1).unwrap();
        assert!(d.is_finite());
    }

    #[test]
    fn fluid_state_checks() {
        let g = make_grid(2, 16).unwrap();
        let bad = Field::from_fn(&g, 2, |c, x| if c == 0 { x[0].sin() } else { 0.0 });
        assert!(FluidState::new(bad, Field::zeros(&g, 1)).is_err());
        let p = Field::from_fn(&g, 1, |_, x| 3.0 + x[1].cos());
        let s = FluidState::new(Field::zeros(&g, 2), p).unwrap();
        assert!(s.p().mean(0).abs() < 1e-14);
        assert!(CoreFunction::by_name("burgers", 2).is_err());
        assert!(CoreFunction::by_name("navier", 2).is_err());
    }
}
