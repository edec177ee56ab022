//! Fine-grid reference for inviscid Burgers `u_t + u u_x = 0` with
//! `u(x, 0) = sin x`, valid before the gradient catastrophe at `t = 1`.
//!
//! The solver is pseudo-spectral with 2/3 dealiasing and classical RK4. An
//! independent oracle solves the characteristic relation `u = sin(x − u t)`
//! by Newton iteration.

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::fluid::advect;
use crate::heat::{HeatPropagator, ScaleStack};
use crate::spectral::{from_spectral, to_spectral, Grid, SpectralField};

/// Time at which the sine profile first steepens into a shock.
pub const BREAKING_TIME: f64 = 1.0;

/// Snapshot of the reference solution.
#[derive(Clone, Debug)]
pub struct BurgersSnapshot {
    pub u: Field,
    pub steps: usize,
}

fn burgers_rhs(u: &Field) -> Field {
    -&advect(u, u)
}

/// Integrates from `sin x` to `t_end` with at most `max_dt` per step.
pub fn reference_burgers(grid: &Grid, t_end: f64, max_dt: f64) -> Result<BurgersSnapshot> {
    if grid.dim() != 1 {
        return Err(invalid("dim", "the burgers reference is one-dimensional"));
    }
    if !(0.0..BREAKING_TIME).contains(&t_end) {
        return Err(invalid(
            "t_end",
            format!("t_end must lie in [0, {BREAKING_TIME}) before the shock forms, got {t_end}"),
        ));
    }
    if !(max_dt > 0.0) {
        return Err(invalid("dt", "time step must be positive"));
    }
    let mut u = Field::from_fn(grid, 1, |_, x| x[0].sin());
    let steps = (t_end / max_dt).ceil() as usize;
    if steps == 0 {
        return Ok(BurgersSnapshot { u, steps });
    }
    let dt = t_end / steps as f64;
    for step in 0..steps {
        let k1 = burgers_rhs(&u);
        let mut s = u.clone();
        s.axpy(0.5 * dt, &k1);
        let k2 = burgers_rhs(&s);
        let mut s = u.clone();
        s.axpy(0.5 * dt, &k2);
        let k3 = burgers_rhs(&s);
        let mut s = u.clone();
        s.axpy(dt, &k3);
        let k4 = burgers_rhs(&s);
        u.axpy(dt / 6.0, &k1);
        u.axpy(dt / 3.0, &k2);
        u.axpy(dt / 3.0, &k3);
        u.axpy(dt / 6.0, &k4);
        if !u.is_finite() {
            return Err(Error::NumericalAbort {
                step,
                t: (step + 1) as f64 * dt,
                reason: "non-finite burgers state".into(),
            });
        }
    }
    Ok(BurgersSnapshot {
        u: u.with_coordinates(t_end, 0.0),
        steps,
    })
}

/// Solution by characteristics: solves `u = sin(x − u t)` pointwise.
pub fn characteristic_solution(grid: &Grid, t: f64) -> Result<Field> {
    if !(0.0..BREAKING_TIME).contains(&t) {
        return Err(invalid("t", format!("characteristics cross at t = {BREAKING_TIME}")));
    }
    let values = (0..grid.num_points())
        .map(|i| {
            let x = grid.point(i)[0];
            let mut u = x.sin();
            for _ in 0..100 {
                let phase = x - u * t;
                let g = u - phase.sin();
                let dg = 1.0 + t * phase.cos();
                let next = u - g / dg;
                let done = (next - u).abs() < 1e-15;
                u = next;
                if done {
                    break;
                }
            }
            u
        })
        .collect();
    Field::new(grid, 1, values, t, 0.0)
}

/// Spectral restriction to a coarser grid: keeps the modes representable on
/// `coarse` except its Nyquist mode.
pub fn restrict(fine: &Field, coarse: &Grid) -> Result<Field> {
    if coarse.dim() != fine.grid().dim() || coarse.size() > fine.grid().size() {
        return Err(invalid("coarse", "restriction needs a coarser grid of the same dimension"));
    }
    let s = to_spectral(fine);
    let fg = fine.grid();
    let nyq = coarse.nyquist();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); coarse.num_points() * fine.ncomp()];
    let n = coarse.num_points();
    for c in 0..fine.ncomp() {
        for i in 0..n {
            let k = coarse.wavevector(i);
            if k.iter().any(|kk| kk.abs() == nyq) {
                continue;
            }
            if let Some(j) = fg.mode_index(k) {
                coeffs[c * n + i] = s.component(c)[j];
            }
        }
    }
    let out = SpectralField::from_raw(coarse.clone(), fine.ncomp(), coeffs, fine.t(), fine.eta());
    Ok(from_spectral(&out))
}

/// Filtered Burgers family on a coarse grid: `ū(η) = e^{η△} R u` and
/// `ū_t(η) = e^{η△} R(−u u_x)`, with `R` the restriction.
pub fn filtered_burgers_stacks(
    fine_u: &Field,
    coarse: &Grid,
    epsilon: f64,
    step: f64,
    count: usize,
) -> Result<(ScaleStack, ScaleStack)> {
    let u0 = restrict(fine_u, coarse)?;
    let ut0 = restrict(&burgers_rhs(fine_u), coarse)?;
    let (su, sut) = (to_spectral(&u0), to_spectral(&ut0));
    let build = |s: &SpectralField| {
        ScaleStack::from_fn(epsilon, step, count, |eta| {
            Ok(from_spectral(&HeatPropagator::new(coarse, eta)?.apply_spectral(s)))
        })
    };
    Ok((build(&su)?, build(&sut)?))
}
