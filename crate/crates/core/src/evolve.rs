//! Time integration of the macroscopic fluid equations on one scale slice,
//! optionally coupled with the linearized filter-defect dynamics of `ψ_(v)`.
//!
//! Pressure never appears explicitly: every right-hand side is projected
//! onto divergence-free fields, the discarded gradient being `−∇p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::fluid::{advect, fluid_source, leray_project, max_divergence, DIVERGENCE_TOL};
use crate::residual::solve_residual_closure;
use crate::spectral::field_norms;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureMode {
    None,
    #[default]
    Helmholtz,
}

/// State of a slice run.
#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub v: Field,
    pub psi: Option<Field>,
    pub eta: f64,
    pub step_count: usize,
}

impl EvolutionState {
    /// Checks that `v` (and `ψ` if present) are solenoidal.
    pub fn new(v: Field, psi: Option<Field>, eta: f64) -> Result<Self> {
        let dim = v.grid().dim();
        if v.ncomp() != dim {
            return Err(Error::ShapeMismatch(format!("velocity needs {dim} components")));
        }
        check_solenoidal("v", &v)?;
        if let Some(p) = &psi {
            if p.grid() != v.grid() || p.ncomp() != dim {
                return Err(Error::ShapeMismatch("psi must match the velocity shape".into()));
            }
            check_solenoidal("psi", p)?;
        }
        let t = v.t();
        Ok(Self {
            t,
            v,
            psi,
            eta,
            step_count: 0,
        })
    }
}

fn check_solenoidal(name: &'static str, f: &Field) -> Result<()> {
    let d = max_divergence(f);
    if d > DIVERGENCE_TOL {
        return Err(crate::error::invalid(name, format!("divergence {d:.3e} exceeds {DIVERGENCE_TOL:e}")));
    }
    Ok(())
}

/// Closure residual `r_(v)` for the current velocity (zero without closure).
pub fn closure_residual_field(v: &Field, closure: ClosureMode, eta: f64) -> Result<Field> {
    match closure {
        ClosureMode::None => Ok(Field::zeros(v.grid(), v.ncomp()).with_coordinates(v.t(), eta)),
        ClosureMode::Helmholtz => {
            let s = fluid_source(v)?;
            solve_residual_closure(&s.slice(0..v.ncomp()), eta)
        }
    }
}

/// `P(−v·∇v + r_(v))` with `P` the Leray projection.
pub fn macroscopic_rhs(v: &Field, closure: ClosureMode, eta: f64) -> Result<Field> {
    let mut w = -&advect(v, v);
    if closure == ClosureMode::Helmholtz {
        w = &w + &closure_residual_field(v, closure, eta)?;
    }
    Ok(leray_project(&w)?.0)
}

/// `P(−v·∇ψ − ψ·∇v + e_(v))`.
pub fn psi_rhs(psi: &Field, v: &Field, e: Option<&Field>) -> Result<Field> {
    let mut w = &advect(v, psi) + &advect(psi, v);
    w = -&w;
    if let Some(e) = e {
        if e.grid() != psi.grid() || e.ncomp() != psi.ncomp() {
            return Err(Error::ShapeMismatch("psi forcing must match psi".into()));
        }
        w = &w + e;
    }
    Ok(leray_project(&w)?.0)
}

fn combine(base: &Field, dt: f64, k: &[&Field; 4]) -> Field {
    let mut out = base.clone();
    out.axpy(dt / 6.0, k[0]);
    out.axpy(dt / 3.0, k[1]);
    out.axpy(dt / 3.0, k[2]);
    out.axpy(dt / 6.0, k[3]);
    out
}

fn shifted(base: &Field, a: f64, k: &Field) -> Field {
    let mut out = base.clone();
    out.axpy(a, k);
    out
}

/// One classical RK4 step of the coupled system. The closure is solved at
/// every stage and both fields are projected after the combination.
pub fn step_rk4(
    state: &EvolutionState,
    dt: f64,
    closure: ClosureMode,
    forcing: Option<&Field>,
) -> Result<EvolutionState> {
    let eta = state.eta;
    let v = &state.v;
    let rhs = |v: &Field, psi: Option<&Field>| -> Result<(Field, Option<Field>)> {
        let kv = macroscopic_rhs(v, closure, eta)?;
        let kp = match psi {
            Some(p) => Some(psi_rhs(p, v, forcing)?),
            None => None,
        };
        Ok((kv, kp))
    };
    let (k1, p1) = rhs(v, state.psi.as_ref())?;
    let psi2 = state.psi.as_ref().zip(p1.as_ref()).map(|(p, k)| shifted(p, 0.5 * dt, k));
    let (k2, p2) = rhs(&shifted(v, 0.5 * dt, &k1), psi2.as_ref())?;
    let psi3 = state.psi.as_ref().zip(p2.as_ref()).map(|(p, k)| shifted(p, 0.5 * dt, k));
    let (k3, p3) = rhs(&shifted(v, 0.5 * dt, &k2), psi3.as_ref())?;
    let psi4 = state.psi.as_ref().zip(p3.as_ref()).map(|(p, k)| shifted(p, dt, k));
    let (k4, p4) = rhs(&shifted(v, dt, &k3), psi4.as_ref())?;
    let t = state.t + dt;
    let v_new = leray_project(&combine(v, dt, &[&k1, &k2, &k3, &k4]))?.0.with_coordinates(t, eta);
    let psi_new = match (&state.psi, p1, p2, p3, p4) {
        (Some(p), Some(a), Some(b), Some(c), Some(d)) => {
            Some(leray_project(&combine(p, dt, &[&a, &b, &c, &d]))?.0.with_coordinates(t, eta))
        }
        _ => None,
    };
    let finite = v_new.is_finite() && psi_new.as_ref().is_none_or(Field::is_finite);
    if !finite {
        return Err(Error::NumericalAbort {
            step: state.step_count + 1,
            t,
            reason: format!(
                "non-finite state; last finite max|v| = {:.6e}, max|psi| = {:.6e}",
                state.v.max_abs(),
                state.psi.as_ref().map_or(0.0, Field::max_abs)
            ),
        });
    }
    Ok(EvolutionState {
        t,
        v: v_new,
        psi: psi_new,
        eta,
        step_count: state.step_count + 1,
    })
}

/// One row of the diagnostics time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub max_div_v: f64,
    pub r_l2: f64,
    pub r_max: f64,
    pub psi_l2: f64,
    pub psi_max: f64,
    /// Running supremum of `max|ψ_(v)|` over all steps so far.
    pub psi_sup: f64,
    /// `η·psi_sup`.
    pub deviation_bound: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 9] = [
        "t",
        "energy",
        "max_div_v",
        "r_l2",
        "r_max",
        "psi_l2",
        "psi_max",
        "psi_sup",
        "deviation_bound",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.t,
            self.energy,
            self.max_div_v,
            self.r_l2,
            self.r_max,
            self.psi_l2,
            self.psi_max,
            self.psi_sup,
            self.deviation_bound,
        ]
    }
}

/// `½∫|v|²` over the torus.
pub fn kinetic_energy(v: &Field) -> f64 {
    let n = v.grid().num_points() as f64;
    let ss: f64 = v.values().iter().map(|x| x * x).sum();
    0.5 * ss / n * v.grid().measure()
}

pub fn diagnostics(state: &EvolutionState, closure: ClosureMode, psi_sup: f64) -> Result<DiagnosticsRecord> {
    let r = field_norms(&closure_residual_field(&state.v, closure, state.eta)?);
    let psi = state.psi.as_ref().map(field_norms);
    Ok(DiagnosticsRecord {
        t: state.t,
        energy: kinetic_energy(&state.v),
        max_div_v: max_divergence(&state.v),
        r_l2: r.l2,
        r_max: r.max,
        psi_l2: psi.map_or(0.0, |n| n.l2),
        psi_max: psi.map_or(0.0, |n| n.max),
        psi_sup,
        deviation_bound: state.eta * psi_sup,
    })
}

/// Settings of a fixed-step run.
#[derive(Clone, Debug)]
pub struct Integration {
    pub dt: f64,
    pub t_end: f64,
    pub closure: ClosureMode,
    pub forcing: Option<Field>,
    /// Diagnostics are recorded every `output_every` steps and at the end.
    pub output_every: usize,
}

impl Integration {
    /// Step sizes reaching `t_end` exactly: full steps of `dt`, the last one
    /// shortened if needed.
    pub fn step_sizes(&self) -> Vec<f64> {
        if self.t_end <= 0.0 {
            return Vec::new();
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        let mut steps = vec![self.dt; n];
        steps[n - 1] = self.t_end - (n - 1) as f64 * self.dt;
        steps
    }
}

/// Output of [`integrate`].
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub state: EvolutionState,
}

/// Advances `state` to `t_end`, checking the solenoidal invariants after
/// every accepted step.
pub fn integrate(initial: EvolutionState, run: &Integration) -> Result<RunOutput> {
    let mut state = initial;
    let mut psi_sup = state.psi.as_ref().map_or(0.0, Field::max_abs);
    let mut records = vec![diagnostics(&state, run.closure, psi_sup)?];
    let steps = run.step_sizes();
    let every = run.output_every.max(1);
    for (n, dt) in steps.iter().enumerate() {
        state = step_rk4(&state, *dt, run.closure, run.forcing.as_ref())?;
        let div = max_divergence(&state.v).max(state.psi.as_ref().map_or(0.0, max_divergence));
        if div > DIVERGENCE_TOL {
            return Err(Error::NumericalAbort {
                step: state.step_count,
                t: state.t,
                reason: format!("divergence {div:.3e} after projection"),
            });
        }
        psi_sup = psi_sup.max(state.psi.as_ref().map_or(0.0, Field::max_abs));
        if (n + 1) % every == 0 || n + 1 == steps.len() {
            records.push(diagnostics(&state, run.closure, psi_sup)?);
        }
    }
    Ok(RunOutput { records, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{random_stream_velocity, taylor_green, velocity_from_stream, StreamMode, TimeProfile};
    use crate::fluid::{fluid_source, project};
    use crate::spectral::make_grid;

    fn tg(size: usize) -> Field {
        let g = make_grid(2, size).unwrap();
        taylor_green(TimeProfile::STEADY).field(&g, 0.0, 0.0)
    }

    #[test]
    fn zero_and_steady_rhs() {
        let v = tg(32);
        let g = v.grid().clone();
        assert_eq!(macroscopic_rhs(&Field::zeros(&g, 2), ClosureMode::Helmholtz, 0.1).unwrap().max_abs(), 0.0);
        assert!(macroscopic_rhs(&v, ClosureMode::None, 0.1).unwrap().max_abs() < 1e-13);
        let with = macroscopic_rhs(&v, ClosureMode::Helmholtz, 0.1).unwrap();
        let s = fluid_source(&v).unwrap().slice(0..2);
        let expected = project(&solve_residual_closure(&s, 0.1).unwrap()).unwrap();
        assert!(with.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn helmholtz_rhs_on_general_flow() {
        let g = make_grid(2, 32).unwrap();
        let v = random_stream_velocity(2, 6, 3, 1.0, TimeProfile::STEADY, |k| k).field(&g, 0.0, 0.0);
        let eta = 0.05;
        let got = macroscopic_rhs(&v, ClosureMode::Helmholtz, eta).unwrap();
        let r = solve_residual_closure(&fluid_source(&v).unwrap().slice(0..2), eta).unwrap();
        let expected = project(&(&r - &advect(&v, &v))).unwrap();
        assert!(got.max_abs_diff(&expected) < 1e-12);
        assert!(max_divergence(&got) < 1e-12);
    }

    #[test]
    fn rigid_translation_is_unchanged() {
        let g = make_grid(2, 16).unwrap();
        let v = Field::from_fn(&g, 2, |c, _| 0.3 + c as f64);
        let s = EvolutionState::new(v.clone(), None, 0.1).unwrap();
        for closure in [ClosureMode::None, ClosureMode::Helmholtz] {
            let next = step_rk4(&s, 0.01, closure, None).unwrap();
            assert!(next.v.max_abs_diff(&v) < 1e-14);
            assert!((next.t - 0.01).abs() < 1e-16);
        }
    }

    #[test]
    fn steady_taylor_green_is_preserved() {
        let v0 = tg(32);
        let mut s = EvolutionState::new(v0.clone(), None, 0.1).unwrap();
        for _ in 0..100 {
            s = step_rk4(&s, 1e-3, ClosureMode::None, None).unwrap();
        }
        assert!(s.v.max_abs_diff(&v0) <= 1e-8);
        assert_eq!(s.step_count, 100);
    }

    #[test]
    fn psi_rhs_cases() {
        let g = make_grid(2, 16).unwrap();
        let z = Field::zeros(&g, 2);
        let v = tg(16);
        assert_eq!(psi_rhs(&z, &v, None).unwrap().max_abs(), 0.0);
        let e = Field::from_fn(&g, 2, |c, x| if c == 0 { x[1].sin() } else { x[0].cos() });
        let got = psi_rhs(&z, &z, Some(&e)).unwrap();
        assert!(got.max_abs_diff(&project(&e).unwrap()) < 1e-14);
    }

    #[test]
    fn trivial_psi_stays_zero() {
        let g = make_grid(2, 16).unwrap();
        let v = random_stream_velocity(9, 5, 3, 1.0, TimeProfile::STEADY, |k| k).field(&g, 0.0, 0.0);
        let s = EvolutionState::new(v, Some(Field::zeros(&g, 2)), 0.05).unwrap();
        let run = Integration {
            dt: 0.01,
            t_end: 0.2,
            closure: ClosureMode::Helmholtz,
            forcing: None,
            output_every: 1,
        };
        let out = integrate(s, &run).unwrap();
        assert!(out.state.psi.unwrap().max_abs() <= 1e-12);
        assert!(out.records.iter().all(|r| r.psi_sup == 0.0));
    }

    #[test]
    fn step_sizes_reach_the_end() {
        let run = Integration {
            dt: 0.03,
            t_end: 0.1,
            closure: ClosureMode::None,
            forcing: None,
            output_every: 1,
        };
        let s = run.step_sizes();
        assert_eq!(s.len(), 4);
        assert!((s.iter().sum::<f64>() - 0.1).abs() < 1e-15);
        let exact = Integration { dt: 0.025, ..run };
        assert_eq!(exact.step_sizes().len(), 4);
    }

    #[test]
    fn bound_column_tracks_running_sup() {
        let g = make_grid(2, 16).unwrap();
        let v = tg(16);
        let psi = velocity_from_stream(&[StreamMode {
            amp: 0.2,
            k: [1, 2],
            phase: 0.3,
            kappa: 0.0,
            profile: TimeProfile::STEADY,
        }])
        .field(&g, 0.0, 0.0);
        let s = EvolutionState::new(v, Some(psi), 0.05).unwrap();
        let run = Integration {
            dt: 0.02,
            t_end: 0.3,
            closure: ClosureMode::None,
            forcing: None,
            output_every: 1,
        };
        let out = integrate(s, &run).unwrap();
        let mut sup = 0.0f64;
        for r in &out.records {
            sup = sup.max(r.psi_max);
            assert_eq!(r.psi_sup, sup);
            assert!((r.deviation_bound - 0.05 * sup).abs() <= 1e-12);
        }
        assert!(out.records.windows(2).all(|w| w[1].t > w[0].t));
    }
}
