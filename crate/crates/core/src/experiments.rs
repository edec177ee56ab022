//! Numerical studies behind the command-line checks: the heat-filter suite,
//! symbolic source derivation, defect convergence under scale refinement,
//! the Fréchet identity, the closure and its error bound, Duhamel
//! reconstruction and sanity checks of the slice evolver.
//!
//! Every study returns a serializable report; nothing here asserts.

use serde::Serialize;

use crate::burgers::{filtered_burgers_stacks, reference_burgers};
use crate::error::{invalid, Result};
use crate::evolve::{integrate, kinetic_energy, ClosureMode, EvolutionState, Integration};
use crate::families::{
    random_scalar, random_stream_velocity, squared_profile, taylor_green, taylor_green_pressure, velocity_from_stream,
    ModalFamily, StreamMode, TimeProfile,
};
use crate::field::Field;
use crate::fluid::{divergence, max_divergence, CoreFunction};
use crate::heat::{
    duhamel_integral, filter_defect_all, heat_propagate, propagate_uniform, ScaleStack,
};
use crate::jet::{derive_source, parse_core, rational, Coord, JetExpr, JetIndex, Monomial, Poly};
use crate::residual::{
    closure_error_bound, closure_residual, frechet_contraction, node_jets, psi_jets, residual_set, residual_stack,
    solve_residual_closure,
};
use crate::spectral::{make_grid, spectral_derivative, Grid};

/// One pass/fail comparison of a measured value against a limit.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// `true` when `value ≤ limit`, `false` for `value ≥ limit` checks.
    pub upper: bool,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            upper: true,
            passed: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            upper: false,
            passed: value >= limit,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self {
            suite: suite.into(),
            checks,
            passed,
        }
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// One refinement level.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergenceRow {
    pub step: f64,
    pub error: f64,
    /// `log2(previous error / error)` for a halved step; absent on the first row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub name: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Builds rows from `(step, error)` pairs ordered from coarse to fine.
    pub fn from_errors(name: impl Into<String>, data: &[(f64, f64)]) -> Self {
        let rows = data
            .iter()
            .enumerate()
            .map(|(i, &(step, error))| ConvergenceRow {
                step,
                error,
                order: (i > 0).then(|| {
                    let (s0, e0) = data[i - 1];
                    (e0 / error).ln() / (s0 / step).ln()
                }),
            })
            .collect();
        Self { name: name.into(), rows }
    }

    /// Smallest measured order, `NaN` with fewer than two rows.
    pub fn min_order(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.order)
            .fold(f64::NAN, |m, o| if m.is_nan() { o } else { m.min(o) })
    }

    pub fn finest(&self) -> &ConvergenceRow {
        self.rows.last().expect("studies have at least one row")
    }
}

fn rel_diff(a: &Field, b: &Field) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// heat filter

/// Semigroup, mean, derivative and divergence properties of the heat
/// propagator on a 64² and a 128-point grid, all relative to `tol`.
pub fn filter_suite(seed: u64, tol: f64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let g2 = make_grid(2, 64)?;
    let g1 = make_grid(1, 128)?;
    for (label, grid) in [("64x64", &g2), ("128", &g1)] {
        let mut f = random_scalar(seed, grid.dim(), 2, 24, 12, TimeProfile::STEADY, |_| 0.0).field(grid, 0.0, 0.0);
        for c in 0..2 {
            let shift = 0.5 + c as f64;
            f.component_mut(c).iter_mut().for_each(|v| *v += shift);
        }
        let (a, b) = (0.013, 0.029);
        let composed = heat_propagate(&heat_propagate(&f, a)?, b)?;
        let direct = heat_propagate(&f, a + b)?;
        checks.push(Check::at_most(format!("{label}: composition"), rel_diff(&composed, &direct), tol));
        let once = heat_propagate(&f, 0.0)?;
        checks.push(Check::at_most(format!("{label}: zero increment"), rel_diff(&once, &f), tol));
        let mean_err = (0..2)
            .map(|c| (direct.mean(c) - f.mean(c)).abs() / f.mean(c).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("{label}: mean preservation"), mean_err, tol));
        for axis in 0..grid.dim() {
            let lhs = spectral_derivative(&direct, axis, 1)?;
            let rhs = heat_propagate(&spectral_derivative(&f, axis, 1)?, a + b)?;
            checks.push(Check::at_most(
                format!("{label}: derivative commutation (axis {axis})"),
                rel_diff(&lhs, &rhs),
                tol,
            ));
        }
        if grid.dim() == 2 {
            let w = random_scalar(seed + 1, 2, 2, 24, 12, TimeProfile::STEADY, |_| 0.0).field(grid, 0.0, 0.0);
            let lhs = divergence(&heat_propagate(&w, 0.05)?);
            let rhs = heat_propagate(&divergence(&w), 0.05)?;
            checks.push(Check::at_most(
                format!("{label}: divergence commutation"),
                rel_diff(&lhs, &rhs),
                tol,
            ));
            let v = random_stream_velocity(seed, 16, 12, 1.0, TimeProfile::STEADY, |k| k).field(grid, 0.0, 0.0);
            let pv = heat_propagate(&v, 0.05)?;
            checks.push(Check::at_most(
                format!("{label}: divergence preservation"),
                max_divergence(&pv) / pv.max_abs(),
                tol,
            ));
        }
    }
    Ok(SuiteReport::new("filter", checks))
}

// ---------------------------------------------------------------------------
// source derivation

/// `s^a = −2 Σ_{b,c} v^b_c v^a_{bc}` for `a ≤ n` and zero for the pressure
/// component, assembled term by term.
pub fn fluid_source_closed_form(dim: usize) -> JetExpr {
    let x = |i: usize| Coord::X(i as u8 + 1);
    let mut comps = Vec::with_capacity(dim + 1);
    for a in 0..dim {
        let mut s = Poly::zero();
        for b in 0..dim {
            for c in 0..dim {
                let mono = Monomial::var(JetIndex::new(b, [x(c)])).mul(&Monomial::var(JetIndex::new(a, [x(b), x(c)])));
                s.add_term(mono, rational(-2, 1));
            }
        }
        comps.push(s);
    }
    comps.push(Poly::zero());
    JetExpr::new(dim, dim + 1, comps)
}

fn same(name: &str, got: &JetExpr, expected: &JetExpr) -> Check {
    Check::at_most(name, if got == expected { 0.0 } else { 1.0 }, 0.0)
}

/// Exact polynomial comparisons of derived sources against closed forms.
pub fn source_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for dim in [1, 2] {
        let core = crate::fluid::fluid_core_expr(dim);
        checks.push(same(
            &format!("fluid core, n = {dim}"),
            &derive_source(&core),
            &fluid_source_closed_form(dim),
        ));
    }
    let burgers = derive_source(&parse_core("u1_t + u1*u1_x1")?);
    let mut expected = Poly::zero();
    expected.add_term(
        Monomial::var(JetIndex::new(0, [Coord::X(1)])).mul(&Monomial::var(JetIndex::new(0, [Coord::X(1), Coord::X(1)]))),
        rational(-2, 1),
    );
    checks.push(same("burgers core", &burgers, &JetExpr::new(1, 1, vec![expected])));
    for text in [
        "u1_t - u1_x1x1",
        "u1_t + 3*u1_x1 - 1/2*u1",
        "u1_t + u2_x1 + u1_x2\nu2_t - u1_x1x2 + 7",
    ] {
        let s = derive_source(&parse_core(text)?);
        checks.push(Check::at_most(
            format!("linear core `{}`", text.replace('\n', "; ")),
            if s.is_zero() { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    Ok(SuiteReport::new("source", checks))
}

// ---------------------------------------------------------------------------
// defect convergence

/// Generators of filter-map families for the residual transport study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Time-oscillating Taylor–Green velocity with its pressure.
    TaylorGreen,
    /// Random divergence-free velocity modes with a random pressure.
    Multimode,
    /// Heat-filtered restriction of a fine-grid Burgers solution.
    Burgers,
}

impl FamilyKind {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "taylor-green" => Ok(Self::TaylorGreen),
            "multimode" => Ok(Self::Multimode),
            "burgers" => Ok(Self::Burgers),
            other => Err(invalid("family", format!("unknown family `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::TaylorGreen => "taylor-green",
            Self::Multimode => "multimode",
            Self::Burgers => "burgers",
        }
    }

    pub fn core(self) -> Result<CoreFunction> {
        match self {
            Self::Burgers => Ok(CoreFunction::burgers()),
            _ => CoreFunction::fluid(2),
        }
    }
}

/// Fine-grid snapshot and coarse grid of the Burgers family.
#[derive(Clone, Debug)]
pub struct BurgersSetup {
    pub fine: Field,
    pub coarse: Grid,
}

impl BurgersSetup {
    pub fn new(fine_size: usize, coarse_size: usize, t: f64) -> Result<Self> {
        if fine_size < 4 * coarse_size {
            return Err(invalid("fine_size", "the reference grid must be at least 4x finer"));
        }
        let fine_grid = make_grid(1, fine_size)?;
        let fine = reference_burgers(&fine_grid, t, 2e-3)?.u;
        Ok(Self {
            fine,
            coarse: make_grid(1, coarse_size)?,
        })
    }

    pub fn stacks(&self, epsilon: f64, step: f64, count: usize) -> Result<(ScaleStack, ScaleStack)> {
        filtered_burgers_stacks(&self.fine, &self.coarse, epsilon, step, count)
    }
}

/// A closed-form family sampled on a grid at a fixed time.
#[derive(Clone, Debug)]
pub struct SampledFamily {
    pub family: ModalFamily,
    pub grid: Grid,
    pub t: f64,
}

impl SampledFamily {
    pub fn stacks(&self, epsilon: f64, step: f64, count: usize) -> Result<(ScaleStack, ScaleStack)> {
        Ok((
            self.family.stack(&self.grid, self.t, epsilon, step, count)?,
            self.family.time_derivative_stack(&self.grid, self.t, epsilon, step, count)?,
        ))
    }
}

/// Taylor–Green velocity with amplitude `cos(ωt)` and matching pressure.
pub fn oscillating_taylor_green(omega: f64) -> ModalFamily {
    let g = TimeProfile::oscillating(omega);
    taylor_green(g).concat(&taylor_green_pressure(squared_profile(g).expect("pure oscillation")))
}

/// Random velocity `(v, p)` family; `rate` maps `|k|²` to the scale rate.
pub fn random_fluid_family(seed: u64, kmax: i64, rate: impl Fn(f64) -> f64 + Copy) -> ModalFamily {
    let profile = TimeProfile {
        c0: 0.4,
        c1: 1.0,
        omega: 1.3,
        phase: 0.2,
    };
    let v = random_stream_velocity(seed, 6, kmax, 1.0, profile, rate);
    let p = random_scalar(seed.wrapping_add(1), 2, 1, 5, kmax, profile, rate);
    v.concat(&p)
}

/// Stacks for `kind` around a fixed scale.
pub enum FamilySource {
    Sampled(SampledFamily),
    Burgers(BurgersSetup),
}

impl FamilySource {
    pub fn new(kind: FamilyKind, seed: u64) -> Result<Self> {
        Ok(match kind {
            FamilyKind::TaylorGreen => Self::Sampled(SampledFamily {
                family: oscillating_taylor_green(1.7),
                grid: make_grid(2, 32)?,
                t: 0.4,
            }),
            FamilyKind::Multimode => Self::Sampled(SampledFamily {
                family: random_fluid_family(seed, 3, |k| k),
                grid: make_grid(2, 32)?,
                t: 0.3,
            }),
            FamilyKind::Burgers => Self::Burgers(BurgersSetup::new(1024, 64, 0.5)?),
        })
    }

    pub fn stacks(&self, epsilon: f64, step: f64, count: usize) -> Result<(ScaleStack, ScaleStack)> {
        match self {
            Self::Sampled(s) => s.stacks(epsilon, step, count),
            Self::Burgers(b) => b.stacks(epsilon, step, count),
        }
    }
}

/// `max|e|` at scale `eta` from a five-node stack of spacing `step`.
pub fn defect_at(core: &CoreFunction, source: &FamilySource, eta: f64, step: f64) -> Result<f64> {
    let (u, ut) = source.stacks(eta - 2.0 * step, step, 5)?;
    let set = residual_set(core, &u, &ut, 2)?;
    Ok(set.e.expect("defect at an interior node").max_abs())
}

/// Refinement study of `max|e|` at scale `eta` for the given spacings
/// (coarse to fine).
pub fn defect_convergence(kind: FamilyKind, seed: u64, eta: f64, steps: &[f64]) -> Result<ConvergenceStudy> {
    let core = kind.core()?;
    let source = FamilySource::new(kind, seed)?;
    let data = steps
        .iter()
        .map(|&h| Ok((h, defect_at(&core, &source, eta, h)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy::from_errors(kind.name(), &data))
}

/// Default spacings `{4h, 2h, h}` of the defect study.
pub fn defect_steps(h: f64) -> [f64; 3] {
    [4.0 * h, 2.0 * h, h]
}

// ---------------------------------------------------------------------------
// Fréchet identity

/// Non-filtered manufactured family for a core, with closed-form `ψ`.
pub fn unfiltered_family(kind: FamilyKind, seed: u64) -> Result<SampledFamily> {
    let rate = |k2: f64| 0.35 * k2 + 0.8;
    Ok(match kind {
        FamilyKind::Burgers => SampledFamily {
            family: random_scalar(
                seed,
                1,
                1,
                5,
                4,
                TimeProfile {
                    c0: 0.5,
                    c1: 1.0,
                    omega: 2.0,
                    phase: 0.1,
                },
                rate,
            ),
            grid: make_grid(1, 64)?,
            t: 0.25,
        },
        _ => SampledFamily {
            family: random_fluid_family(seed, 3, rate),
            grid: make_grid(2, 32)?,
            t: 0.25,
        },
    })
}

/// Relative discrepancy `max|e − C·ψ| / max|C·ψ|` at scale `eta` with `e`
/// measured by finite differences of spacing `step` and `ψ` in closed form.
pub fn frechet_discrepancy(core: &CoreFunction, fam: &SampledFamily, eta: f64, step: f64) -> Result<f64> {
    let (u, ut) = fam.stacks(eta - 2.0 * step, step, 5)?;
    let e = residual_set(core, &u, &ut, 2)?.e.expect("interior node");
    let psi = fam.family.filter_defect(&fam.grid, fam.t, eta);
    let psi_t = fam.family.filter_defect_time_derivative(&fam.grid, fam.t, eta);
    let contraction = frechet_contraction(core.symbolic(), &node_jets(&u, &ut, 2)?, &psi_jets(&psi, &psi_t)?)?;
    Ok(rel_diff(&e, &contraction))
}

pub fn frechet_study(kind: FamilyKind, seed: u64, eta: f64, steps: &[f64]) -> Result<ConvergenceStudy> {
    let core = kind.core()?;
    let fam = unfiltered_family(kind, seed)?;
    let data = steps
        .iter()
        .map(|&h| Ok((h, frechet_discrepancy(&core, &fam, eta, h)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy::from_errors(format!("frechet/{}", kind.name()), &data))
}

// ---------------------------------------------------------------------------
// closure and its error bound

/// Back-substitution and closed-form checks of the Helmholtz closure.
pub fn closure_suite(seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let g2 = make_grid(2, 64)?;
    let s = random_scalar(seed, 2, 2, 30, 20, TimeProfile::STEADY, |_| 0.0).field(&g2, 0.0, 0.0);
    for eta in [1e-3, 0.05, 1.0] {
        let r = solve_residual_closure(&s, eta)?;
        checks.push(Check::at_most(
            format!("back-substitution, eta = {eta}"),
            closure_residual(&r, &s, eta),
            1e-10,
        ));
    }
    let g1 = make_grid(1, 32)?;
    let zero = Field::zeros(&g1, 1);
    checks.push(Check::at_most(
        "s = 0",
        solve_residual_closure(&zero, 0.1)?.max_abs(),
        1e-12,
    ));
    let sine = Field::from_fn(&g1, 1, |_, x| x[0].sin());
    checks.push(Check::at_most(
        "s = sin x, eta = 0.1",
        solve_residual_closure(&sine, 0.1)?.max_abs_diff(&sine.scaled(1.0 / 11.0)),
        1e-12,
    ));
    let constant = Field::from_fn(&g1, 1, |_, _| 2.5);
    checks.push(Check::at_most(
        "s = 2.5, eta = 0.2",
        solve_residual_closure(&constant, 0.2)?.max_abs_diff(&constant.scaled(0.2)),
        1e-12,
    ));
    let mode = Field::from_fn(&g2, 1, |_, x| (2.0 * x[0] - 3.0 * x[1] + 0.4).cos());
    let eta = 0.25;
    checks.push(Check::at_most(
        "s = cos(2x - 3y + 0.4), eta = 0.25",
        solve_residual_closure(&mode, eta)?.max_abs_diff(&mode.scaled(1.0 / (13.0 + 1.0 / eta))),
        1e-12,
    ));
    let mut previous = f64::INFINITY;
    let mut monotone = 0.0;
    for eta in [1.0, 0.1, 0.01, 1e-3, 1e-4] {
        let m = solve_residual_closure(&s, eta)?.max_abs();
        if m > previous {
            monotone = 1.0;
        }
        previous = m;
    }
    checks.push(Check::at_most("closure decreases as eta -> 0", monotone, 0.0));
    checks.push(Check::at_most("closure at eta = 1e-4 relative to s", previous / s.max_abs(), 2e-4));
    Ok(SuiteReport::new("closure", checks))
}

/// Both sides of the closure error bound at every interior node.
#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub eta: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundStudy {
    pub name: String,
    pub epsilon: f64,
    /// `max|r|` at the first node, reported since `r(0) = 0` cannot be checked.
    pub r_at_epsilon: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundStudy {
    pub fn from_stack(name: impl Into<String>, r: &ScaleStack) -> Result<Self> {
        let rows = (1..r.len() - 1)
            .map(|j| {
                let (lhs, rhs) = closure_error_bound(r, j)?;
                Ok(BoundRow { eta: r.node(j), lhs, rhs })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.into(),
            epsilon: r.epsilon(),
            r_at_epsilon: r.field(0).max_abs(),
            rows,
        })
    }

    /// Largest `lhs / rhs` over the nodes; pairs below `floor` on both sides
    /// count as satisfied.
    pub fn worst_ratio(&self, floor: f64) -> f64 {
        self.rows
            .iter()
            .map(|r| if r.lhs <= floor { 0.0 } else { r.lhs / r.rhs })
            .fold(0.0, f64::max)
    }
}

/// Stack of `r(x, η) = g(η)·sin x` on a 1-D grid.
pub fn manufactured_residual_stack(
    profile: impl Fn(f64) -> f64,
    epsilon: f64,
    eta0: f64,
    count: usize,
) -> Result<ScaleStack> {
    let grid = make_grid(1, 32)?;
    let step = (eta0 - epsilon) / (count - 1) as f64;
    ScaleStack::from_fn(epsilon, step, count, |eta| {
        Ok(Field::from_fn(&grid, 1, |_, x| profile(eta) * x[0].sin()).with_coordinates(0.0, eta))
    })
}

/// Residual stack of the filtered Burgers family over `[epsilon, eta0]`.
pub fn burgers_residual_stack(setup: &BurgersSetup, epsilon: f64, eta0: f64, count: usize) -> Result<ScaleStack> {
    let step = (eta0 - epsilon) / (count - 1) as f64;
    let (u, ut) = setup.stacks(epsilon, step, count)?;
    residual_stack(&CoreFunction::burgers(), &u, &ut)
}

// ---------------------------------------------------------------------------
// Duhamel reconstruction

#[derive(Clone, Debug, Serialize)]
pub struct DuhamelStudy {
    pub name: String,
    /// Reconstruction error at the last node versus node spacing.
    pub convergence: ConvergenceStudy,
    /// Largest `max|u − ū| / (η·sup|ψ|)` over all nodes of the finest stack.
    pub worst_bound_ratio: f64,
}

/// `u − ū` at every node, with `ū` the filter map through `u(ε)`.
pub fn deviation_from_filter_map(u: &ScaleStack) -> Result<Vec<Field>> {
    let ubar = propagate_uniform(u.field(0), u.epsilon(), u.step(), u.len())?;
    Ok(u.fields().iter().zip(ubar.fields()).map(|(a, b)| a - b).collect())
}

/// Largest ratio `max|u − ū| / (η·sup_{η̂ ≤ η}|ψ|)` over the nodes of a stack.
pub fn bound_ratio(u: &ScaleStack, psi: &ScaleStack) -> Result<f64> {
    let dev = deviation_from_filter_map(u)?;
    let mut sup = 0.0f64;
    let mut worst = 0.0f64;
    for (j, d) in dev.iter().enumerate() {
        sup = sup.max(psi.field(j).max_abs());
        if j > 0 {
            worst = worst.max(d.max_abs() / (u.node(j) * sup));
        }
    }
    Ok(worst)
}

/// Duhamel study on `fam` over `[epsilon, eta_end]` with the given node counts
/// (each one doubling the previous resolution).
pub fn duhamel_study(
    name: &str,
    fam: &SampledFamily,
    epsilon: f64,
    eta_end: f64,
    counts: &[usize],
) -> Result<DuhamelStudy> {
    let mut data = Vec::new();
    let mut worst = 0.0;
    for &count in counts {
        let step = (eta_end - epsilon) / (count - 1) as f64;
        let u = fam.family.stack(&fam.grid, fam.t, epsilon, step, count)?;
        let psi = filter_defect_all(&u)?;
        let direct = deviation_from_filter_map(&u)?;
        let recon = duhamel_integral(&psi, count - 1)?;
        data.push((step, recon.max_abs_diff(&direct[count - 1])));
        worst = bound_ratio(&u, &psi)?;
    }
    Ok(DuhamelStudy {
        name: name.into(),
        convergence: ConvergenceStudy::from_errors(name, &data),
        worst_bound_ratio: worst,
    })
}

/// Manufactured non-filtered families used by the Duhamel study.
pub fn duhamel_families(seed: u64) -> Result<Vec<(String, SampledFamily)>> {
    let grid = make_grid(2, 64)?;
    Ok(vec![
        (
            "scalar modes".into(),
            SampledFamily {
                family: random_scalar(seed, 2, 2, 12, 6, TimeProfile::STEADY, |k2| 0.4 * k2 + 1.5),
                grid: grid.clone(),
                t: 0.0,
            },
        ),
        (
            "velocity modes".into(),
            SampledFamily {
                family: random_stream_velocity(seed + 7, 10, 5, 1.0, TimeProfile::STEADY, |k2| 1.6 * k2),
                grid: grid.clone(),
                t: 0.0,
            },
        ),
        (
            "single mode, no decay".into(),
            SampledFamily {
                family: velocity_from_stream(&[StreamMode {
                    amp: 0.7,
                    k: [2, 1],
                    phase: 0.3,
                    kappa: 0.0,
                    profile: TimeProfile::STEADY,
                }]),
                grid,
                t: 0.0,
            },
        ),
    ])
}

// ---------------------------------------------------------------------------
// slice evolution

fn run(state: EvolutionState, dt: f64, t_end: f64, closure: ClosureMode) -> Result<EvolutionState> {
    let cfg = Integration {
        dt,
        t_end,
        closure,
        forcing: None,
        output_every: usize::MAX,
    };
    Ok(integrate(state, &cfg)?.state)
}

/// Self-convergence of RK4: errors against a run with `dt/16`, for `dt`,
/// `dt/2` and `dt/4`. The error norm covers `v` and, if present, `ψ`.
pub fn rk_self_convergence(
    name: &str,
    initial: &EvolutionState,
    closure: ClosureMode,
    dt: f64,
    t_end: f64,
) -> Result<ConvergenceStudy> {
    let reference = run(initial.clone(), dt / 16.0, t_end, closure)?;
    let err = |s: &EvolutionState| {
        let ev = s.v.max_abs_diff(&reference.v);
        let ep = match (&s.psi, &reference.psi) {
            (Some(a), Some(b)) => a.max_abs_diff(b),
            _ => 0.0,
        };
        ev.max(ep)
    };
    let data = [dt, dt / 2.0, dt / 4.0]
        .iter()
        .map(|&h| Ok((h, err(&run(initial.clone(), h, t_end, closure)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy::from_errors(name, &data))
}

/// Initial random divergence-free velocity used by the evolution checks.
pub fn random_velocity(grid: &Grid, seed: u64) -> Field {
    random_stream_velocity(seed, 6, 3, 1.0, TimeProfile::STEADY, |k| k).field(grid, 0.0, 0.0)
}

/// Single divergence-free `ψ` mode.
pub fn psi_mode(grid: &Grid) -> Field {
    velocity_from_stream(&[StreamMode {
        amp: 0.3,
        k: [1, 2],
        phase: 0.4,
        kappa: 0.0,
        profile: TimeProfile::STEADY,
    }])
    .field(grid, 0.0, 0.0)
}

/// Steady-state, energy, RK order and trivial-ψ checks.
pub fn evolution_suite(seed: u64) -> Result<(SuiteReport, Vec<ConvergenceStudy>)> {
    let grid = make_grid(2, 32)?;
    let mut checks = Vec::new();
    let tg = taylor_green(TimeProfile::STEADY).field(&grid, 0.0, 0.0);

    let end = run(EvolutionState::new(tg.clone(), None, 0.05)?, 1e-3, 0.1, ClosureMode::None)?;
    checks.push(Check::at_most("steady taylor-green, 100 steps", end.v.max_abs_diff(&tg), 1e-8));

    let v0 = random_velocity(&grid, seed);
    let e0 = kinetic_energy(&v0);
    let end = run(EvolutionState::new(v0.clone(), None, 0.05)?, 1e-3, 1.0, ClosureMode::None)?;
    checks.push(Check::at_most(
        "energy drift, closure none, 1000 steps",
        (kinetic_energy(&end.v) - e0).abs() / e0,
        1e-8,
    ));

    let studies = vec![
        rk_self_convergence(
            "rk4/velocity",
            &EvolutionState::new(v0.clone(), None, 0.05)?,
            ClosureMode::Helmholtz,
            0.05,
            0.5,
        )?,
        rk_self_convergence(
            "rk4/psi",
            &EvolutionState::new(tg, Some(psi_mode(&grid)), 0.05)?,
            ClosureMode::None,
            0.05,
            0.5,
        )?,
    ];
    for s in &studies {
        checks.push(Check::at_least(format!("{} order", s.name), s.min_order(), 3.8));
    }

    let end = run(
        EvolutionState::new(v0, Some(Field::zeros(&grid, 2)), 0.05)?,
        0.01,
        0.5,
        ClosureMode::Helmholtz,
    )?;
    checks.push(Check::at_most(
        "trivial psi persists",
        end.psi.as_ref().map_or(f64::INFINITY, Field::max_abs),
        1e-12,
    ));
    Ok((SuiteReport::new("evolution", checks), studies))
}
