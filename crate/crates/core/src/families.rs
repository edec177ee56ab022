//! Manufactured fields built from finitely many Fourier modes with closed-form
//! dependence on time and scale.
//!
//! A term contributes `c·T(t)·exp(−κη)·cos(k·x + θ)` to one component, with
//! `T(t) = c0 + c1·cos(ωt + φ)`. Choosing `κ = |k|²` makes the term a filter
//! map; any other rate gives a closed-form filter defect
//! `ψ = (|k|² − κ)·term`.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::Field;
use crate::heat::ScaleStack;
use crate::spectral::Grid;

/// `T(t) = c0 + c1·cos(ωt + φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeProfile {
    pub c0: f64,
    pub c1: f64,
    pub omega: f64,
    pub phase: f64,
}

impl TimeProfile {
    pub const STEADY: TimeProfile = TimeProfile {
        c0: 1.0,
        c1: 0.0,
        omega: 0.0,
        phase: 0.0,
    };

    pub fn oscillating(omega: f64) -> Self {
        Self {
            c0: 0.0,
            c1: 1.0,
            omega,
            phase: 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.c0 + self.c1 * (self.omega * t + self.phase).cos()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        -self.c1 * self.omega * (self.omega * t + self.phase).sin()
    }

    /// Profile of the product `T·S` of two profiles with equal frequency,
    /// when one of them is steady.
    fn times(&self, other: &TimeProfile) -> Option<TimeProfile> {
        if other.c1 == 0.0 {
            Some(TimeProfile {
                c0: self.c0 * other.c0,
                c1: self.c1 * other.c0,
                ..*self
            })
        } else if self.c1 == 0.0 {
            other.times(self)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModalTerm {
    pub component: usize,
    pub coeff: f64,
    pub k: [i64; 2],
    pub phase: f64,
    /// Scale decay rate κ.
    pub kappa: f64,
    pub profile: TimeProfile,
}

impl ModalTerm {
    pub fn k_squared(&self) -> f64 {
        (self.k[0] * self.k[0] + self.k[1] * self.k[1]) as f64
    }

    fn angle(&self, x: [f64; 2]) -> f64 {
        self.k[0] as f64 * x[0] + self.k[1] as f64 * x[1] + self.phase
    }

    fn amplitude(&self, t: f64, eta: f64) -> f64 {
        self.coeff * self.profile.value(t) * (-self.kappa * eta).exp()
    }
}

/// A finite sum of modal terms over `ncomp` components.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalFamily {
    dim: usize,
    ncomp: usize,
    terms: Vec<ModalTerm>,
}

impl ModalFamily {
    pub fn new(dim: usize, ncomp: usize, terms: Vec<ModalTerm>) -> Self {
        Self { dim, ncomp, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn terms(&self) -> &[ModalTerm] {
        &self.terms
    }

    /// True when every term is a filter map (`κ = |k|²`).
    pub fn is_filtered(&self) -> bool {
        self.terms.iter().all(|t| t.kappa == t.k_squared())
    }

    fn sample(&self, grid: &Grid, t: f64, eta: f64, weight: impl Fn(&ModalTerm) -> f64) -> Field {
        let mut values = vec![0.0; self.ncomp * grid.num_points()];
        let n = grid.num_points();
        for term in &self.terms {
            let w = weight(term);
            if w == 0.0 {
                continue;
            }
            let slot = &mut values[term.component * n..(term.component + 1) * n];
            for (i, v) in slot.iter_mut().enumerate() {
                *v += w * term.angle(grid.point(i)).cos();
            }
        }
        Field::new(grid, self.ncomp, values, t, eta).expect("modal family samples are finite")
    }

    pub fn field(&self, grid: &Grid, t: f64, eta: f64) -> Field {
        self.sample(grid, t, eta, |m| m.amplitude(t, eta))
    }

    pub fn time_derivative(&self, grid: &Grid, t: f64, eta: f64) -> Field {
        self.sample(grid, t, eta, |m| {
            m.coeff * m.profile.derivative(t) * (-m.kappa * eta).exp()
        })
    }

    pub fn eta_derivative(&self, grid: &Grid, t: f64, eta: f64) -> Field {
        self.sample(grid, t, eta, |m| -m.kappa * m.amplitude(t, eta))
    }

    /// Closed-form `ψ = (∂_η − △)u`.
    pub fn filter_defect(&self, grid: &Grid, t: f64, eta: f64) -> Field {
        self.sample(grid, t, eta, |m| (m.k_squared() - m.kappa) * m.amplitude(t, eta))
    }

    /// Closed-form `ψ_t`.
    pub fn filter_defect_time_derivative(&self, grid: &Grid, t: f64, eta: f64) -> Field {
        self.sample(grid, t, eta, |m| {
            (m.k_squared() - m.kappa) * m.coeff * m.profile.derivative(t) * (-m.kappa * eta).exp()
        })
    }

    /// The filter map generated by this family's slice at `eta0`.
    pub fn filtered_from(&self, eta0: f64) -> ModalFamily {
        let terms = self
            .terms
            .iter()
            .map(|m| {
                let k2 = m.k_squared();
                ModalTerm {
                    coeff: m.coeff * ((k2 - m.kappa) * eta0).exp(),
                    kappa: k2,
                    ..*m
                }
            })
            .collect();
        ModalFamily::new(self.dim, self.ncomp, terms)
    }

    /// Samples at the nodes `epsilon + j·step`.
    pub fn stack(&self, grid: &Grid, t: f64, epsilon: f64, step: f64, count: usize) -> Result<ScaleStack> {
        ScaleStack::from_fn(epsilon, step, count, |eta| Ok(self.field(grid, t, eta)))
    }

    pub fn time_derivative_stack(
        &self,
        grid: &Grid,
        t: f64,
        epsilon: f64,
        step: f64,
        count: usize,
    ) -> Result<ScaleStack> {
        ScaleStack::from_fn(epsilon, step, count, |eta| Ok(self.time_derivative(grid, t, eta)))
    }

    /// Family with every component of `other` appended after this one's.
    pub fn concat(&self, other: &ModalFamily) -> ModalFamily {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|m| ModalTerm {
            component: m.component + self.ncomp,
            ..*m
        }));
        ModalFamily::new(self.dim.max(other.dim), self.ncomp + other.ncomp, terms)
    }

    /// Same modes with every scale rate replaced by `rate(term)`.
    pub fn with_rates(&self, rate: impl Fn(&ModalTerm) -> f64) -> ModalFamily {
        let terms = self
            .terms
            .iter()
            .map(|m| ModalTerm {
                kappa: rate(m),
                ..*m
            })
            .collect();
        ModalFamily::new(self.dim, self.ncomp, terms)
    }
}

/// One stream-function mode `φ = a·cos(k·x + θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamMode {
    pub amp: f64,
    pub k: [i64; 2],
    pub phase: f64,
    pub kappa: f64,
    pub profile: TimeProfile,
}

/// Divergence-free velocity `(∂_y φ, −∂_x φ)` on a 2-D grid.
pub fn velocity_from_stream(modes: &[StreamMode]) -> ModalFamily {
    let mut terms = Vec::new();
    for m in modes {
        // ∂_y cos(α) = −k_y sin α = k_y cos(α + π/2); −∂_x cos α = k_x cos(α − π/2)
        let base = ModalTerm {
            component: 0,
            coeff: m.amp * m.k[1] as f64,
            k: m.k,
            phase: m.phase + FRAC_PI_2,
            kappa: m.kappa,
            profile: m.profile,
        };
        if base.coeff != 0.0 {
            terms.push(base);
        }
        let second = ModalTerm {
            component: 1,
            coeff: m.amp * m.k[0] as f64,
            phase: m.phase - FRAC_PI_2,
            ..base
        };
        if second.coeff != 0.0 {
            terms.push(second);
        }
    }
    ModalFamily::new(2, 2, terms)
}

/// Filtered Taylor–Green velocity `g(t)·e^{−2η}(sin x cos y, −cos x sin y)`.
pub fn taylor_green(profile: TimeProfile) -> ModalFamily {
    // φ = sin x sin y = ½cos(x − y) − ½cos(x + y)
    velocity_from_stream(&[
        StreamMode {
            amp: 0.5,
            k: [1, -1],
            phase: 0.0,
            kappa: 2.0,
            profile,
        },
        StreamMode {
            amp: -0.5,
            k: [1, 1],
            phase: 0.0,
            kappa: 2.0,
            profile,
        },
    ])
}

/// Pressure `(g²/4)e^{−4η}(cos 2x + cos 2y)` matching [`taylor_green`]; the
/// profile must be steady or have a steady partner, so `g²` is expressed
/// through the caller-supplied squared profile.
pub fn taylor_green_pressure(squared: TimeProfile) -> ModalFamily {
    let term = |k: [i64; 2]| ModalTerm {
        component: 0,
        coeff: 0.25,
        k,
        phase: 0.0,
        kappa: 4.0,
        profile: squared,
    };
    ModalFamily::new(2, 1, vec![term([2, 0]), term([0, 2])])
}

/// Squared amplitude of `g(t) = c0 + c1 cos(ωt + φ)` as a profile at
/// frequency `2ω`, which exists when `c0 = 0` (pure oscillation) or `c1 = 0`.
pub fn squared_profile(g: TimeProfile) -> Option<TimeProfile> {
    if g.c1 == 0.0 {
        return g.times(&g);
    }
    if g.c0 != 0.0 {
        return None;
    }
    // cos² = ½ + ½cos(2·)
    Some(TimeProfile {
        c0: 0.5 * g.c1 * g.c1,
        c1: 0.5 * g.c1 * g.c1,
        omega: 2.0 * g.omega,
        phase: 2.0 * g.phase,
    })
}

/// Velocity and pressure of the filtered Taylor–Green family as one
/// `(v, p)` family.
pub fn taylor_green_state(g: TimeProfile) -> ModalFamily {
    let sq = squared_profile(g).expect("taylor-green amplitude must be steady or a pure oscillation");
    taylor_green(g).concat(&taylor_green_pressure(sq))
}

/// Random divergence-free velocity with stream modes `1 ≤ |k_axis| ≤ kmax`.
/// `kappa` maps `|k|²` to the scale rate; the identity gives a filter map.
pub fn random_stream_velocity(
    seed: u64,
    count: usize,
    kmax: i64,
    amplitude: f64,
    profile: TimeProfile,
    kappa: impl Fn(f64) -> f64,
) -> ModalFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<StreamMode> = (0..count)
        .map(|_| {
            let mut k = [0i64; 2];
            while k == [0, 0] {
                k = [rng.random_range(-kmax..=kmax), rng.random_range(-kmax..=kmax)];
            }
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            StreamMode {
                amp: amplitude * rng.random_range(-1.0..1.0) / k2.sqrt(),
                k,
                phase: rng.random_range(0.0..std::f64::consts::TAU),
                kappa: kappa(k2),
                profile,
            }
        })
        .collect();
    velocity_from_stream(&modes)
}

/// Random scalar modes on a grid of dimension `dim`, `|k_axis| ≤ kmax`.
pub fn random_scalar(
    seed: u64,
    dim: usize,
    ncomp: usize,
    count: usize,
    kmax: i64,
    profile: TimeProfile,
    kappa: impl Fn(f64) -> f64,
) -> ModalFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..count)
        .map(|n| {
            let kx = rng.random_range(-kmax..=kmax);
            let ky = if dim == 2 { rng.random_range(-kmax..=kmax) } else { 0 };
            let k2 = (kx * kx + ky * ky) as f64;
            ModalTerm {
                component: n % ncomp,
                coeff: rng.random_range(-1.0..1.0),
                k: [kx, ky],
                phase: rng.random_range(0.0..std::f64::consts::TAU),
                kappa: kappa(k2),
                profile,
            }
        })
        .collect();
    ModalFamily::new(dim, ncomp, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::max_divergence;
    use crate::heat::filter_defect_stack;
    use crate::spectral::{laplacian, make_grid};

    #[test]
    fn taylor_green_matches_closed_form() {
        let g = make_grid(2, 32).unwrap();
        let fam = taylor_green(TimeProfile::STEADY);
        let eta = 0.07;
        let v = fam.field(&g, 0.0, eta);
        let d = (-2.0 * eta).exp();
        let expected = Field::from_fn(&g, 2, |c, x| {
            if c == 0 {
                d * x[0].sin() * x[1].cos()
            } else {
                -d * x[0].cos() * x[1].sin()
            }
        });
        assert!(v.max_abs_diff(&expected) < 1e-14);
        assert!(fam.is_filtered());
        let p = taylor_green_pressure(TimeProfile::STEADY).field(&g, 0.0, eta);
        let expected = Field::from_fn(&g, 1, |_, x| 0.25 * d * d * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()));
        assert!(p.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn squared_profiles() {
        let g = TimeProfile::oscillating(1.5);
        let sq = squared_profile(g).unwrap();
        for t in [0.0, 0.3, 1.7] {
            assert!((sq.value(t) - g.value(t).powi(2)).abs() < 1e-14);
        }
        let steady = TimeProfile {
            c0: 2.0,
            ..TimeProfile::STEADY
        };
        assert_eq!(squared_profile(steady).unwrap().value(0.4), 4.0);
        let mixed = TimeProfile {
            c0: 1.0,
            ..TimeProfile::oscillating(1.0)
        };
        assert!(squared_profile(mixed).is_none());
    }

    #[test]
    fn stream_velocity_is_solenoidal() {
        let g = make_grid(2, 32).unwrap();
        let fam = random_stream_velocity(7, 6, 4, 1.0, TimeProfile::STEADY, |k2| k2);
        let v = fam.field(&g, 0.0, 0.05);
        assert!(max_divergence(&v) < 1e-12);
        assert!(v.max_abs() > 0.1);
    }

    #[test]
    fn closed_form_defect_matches_definition() {
        let g = make_grid(2, 32).unwrap();
        let fam = random_scalar(3, 2, 2, 5, 3, TimeProfile::oscillating(2.0), |k2| 0.5 * k2 + 1.0);
        let (t, eta) = (0.4, 0.2);
        let psi = fam.filter_defect(&g, t, eta);
        let u = fam.field(&g, t, eta);
        let direct = &fam.eta_derivative(&g, t, eta) - &laplacian(&u);
        assert!(psi.max_abs_diff(&direct) < 1e-12);
        let h = 1e-5;
        let fd = &(&fam.field(&g, t + h, eta) - &fam.field(&g, t - h, eta)) * (0.5 / h);
        assert!(fd.max_abs_diff(&fam.time_derivative(&g, t, eta)) < 1e-8);
    }

    #[test]
    fn filtered_family_has_small_stack_defect() {
        let g = make_grid(1, 16).unwrap();
        let fam = random_scalar(5, 1, 1, 4, 3, TimeProfile::STEADY, |k2| 0.3 * k2).filtered_from(0.1);
        assert!(fam.is_filtered());
        let stack = fam.stack(&g, 0.0, 0.1, 0.002, 9).unwrap();
        let psi = filter_defect_stack(&stack).unwrap();
        assert!(psi.sup_abs() < 1e-3);
    }
}
