//! Run configuration for slice evolutions, its validation, and the run
//! driver that ties the evolver to the output files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{integrate, ClosureMode, DiagnosticsRecord, EvolutionState, Integration};
use crate::families::{random_stream_velocity, taylor_green, velocity_from_stream, StreamMode, TimeProfile};
use crate::field::Field;
use crate::fluid::project;
use crate::io::{read_checkpoint, write_checkpoint, write_diagnostics_csv};
use crate::spectral::{make_grid, Grid};

/// Courant number used for the default and the maximal time step.
pub const CFL: f64 = 0.5;

fn default_grid_size() -> usize {
    32
}

fn default_dim() -> usize {
    2
}

fn default_core() -> String {
    "fluid".into()
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    TaylorGreen {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Random stream-function modes drawn from the run seed.
    RandomModes {
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_kmax")]
        kmax: i64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    Uniform {
        velocity: Vec<f64>,
    },
    Checkpoint {
        path: PathBuf,
    },
}

fn default_modes() -> usize {
    6
}

fn default_kmax() -> i64 {
    3
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::TaylorGreen { amplitude: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiInitial {
    #[default]
    Zero,
    /// Divergence-free single stream mode `a·cos(k·x)`.
    Mode { k: [i64; 2], amplitude: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiForcing {
    #[default]
    Zero,
    /// Forcing field read from a checkpoint; its first `dim` components are used.
    Supplied { path: PathBuf },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub initial: PsiInitial,
    #[serde(default)]
    pub forcing: PsiForcing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File names, relative to the output directory.
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_checkpoint")]
    pub checkpoint: String,
    #[serde(default = "default_every")]
    pub every: usize,
}

fn default_csv() -> String {
    "diagnostics.csv".into()
}

fn default_checkpoint() -> String {
    "final.ckp".into()
}

fn default_every() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv: default_csv(),
            checkpoint: default_checkpoint(),
            every: default_every(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_core")]
    pub core: String,
    #[serde(default)]
    pub closure: ClosureMode,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub psi: PsiConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn config_error(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_error(field, format!("must be positive and finite, got {v}")))
    }
}

/// A validated run: the configuration with `eta` and `dt` filled in, the
/// initial state and the optional `ψ` forcing.
#[derive(Clone, Debug)]
pub struct PreparedRun {
    pub config: RunConfig,
    pub initial: EvolutionState,
    pub forcing: Option<Field>,
}

impl RunConfig {
    /// Slice scale, from `eta` or from `β δ²`.
    pub fn resolved_eta(&self) -> Result<f64> {
        let eta = match (self.eta, self.beta, self.delta) {
            (Some(eta), None, None) => eta,
            (None, Some(b), Some(d)) => {
                positive("beta", b)?;
                positive("delta", d)?;
                b * d * d
            }
            (Some(_), _, _) => return Err(config_error("eta", "give either eta or beta and delta, not both")),
            (None, Some(_), None) => return Err(config_error("delta", "beta needs delta")),
            (None, None, Some(_)) => return Err(config_error("beta", "delta needs beta")),
            (None, None, None) => return Err(config_error("eta", "missing; give eta or beta and delta")),
        };
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(config_error("eta", format!("must lie in (0, 1], got {eta}")));
        }
        Ok(eta)
    }

    fn grid(&self) -> Result<Grid> {
        if self.dim != 2 {
            return Err(config_error("dim", "slice evolution runs on 2-D grids"));
        }
        make_grid(self.dim, self.grid_size).map_err(|e| config_error("grid_size", e.to_string()))
    }

    fn initial_velocity(&self, grid: &Grid) -> Result<Field> {
        let v = match &self.initial {
            InitialCondition::TaylorGreen { amplitude } => {
                taylor_green(TimeProfile::STEADY).field(grid, 0.0, 0.0).scaled(*amplitude)
            }
            InitialCondition::RandomModes { modes, kmax, amplitude } => {
                if *kmax < 1 || 3 * *kmax as usize > grid.size() {
                    return Err(config_error("initial.kmax", "modes must be retained by the 2/3 rule"));
                }
                random_stream_velocity(self.seed, *modes, *kmax, *amplitude, TimeProfile::STEADY, |k| k)
                    .field(grid, 0.0, 0.0)
            }
            InitialCondition::Uniform { velocity } => {
                if velocity.len() != self.dim {
                    return Err(config_error("initial.velocity", format!("needs {} entries", self.dim)));
                }
                Field::from_fn(grid, self.dim, |c, _| velocity[c])
            }
            InitialCondition::Checkpoint { path } => {
                let ck = read_checkpoint(path)?;
                if ck.field.grid() != grid || ck.field.ncomp() < self.dim {
                    return Err(config_error("initial.path", "checkpoint grid does not match the run"));
                }
                ck.field.slice(0..self.dim)
            }
        };
        if !v.is_finite() {
            return Err(config_error("initial", "non-finite initial velocity"));
        }
        Ok(v.with_coordinates(0.0, 0.0))
    }

    fn initial_psi(&self, grid: &Grid) -> Result<Option<Field>> {
        if !self.psi.enabled {
            return Ok(None);
        }
        let psi = match self.psi.initial {
            PsiInitial::Zero => Field::zeros(grid, self.dim),
            PsiInitial::Mode { k, amplitude } => {
                if k == [0, 0] || k.iter().any(|kk| 3 * kk.unsigned_abs() as usize > grid.size()) {
                    return Err(config_error("psi.initial.k", "must be nonzero and retained by the 2/3 rule"));
                }
                velocity_from_stream(&[StreamMode {
                    amp: amplitude,
                    k,
                    phase: 0.0,
                    kappa: 0.0,
                    profile: TimeProfile::STEADY,
                }])
                .field(grid, 0.0, 0.0)
            }
        };
        Ok(Some(psi))
    }

    fn forcing(&self, grid: &Grid) -> Result<Option<Field>> {
        match (&self.psi.forcing, self.psi.enabled) {
            (PsiForcing::Supplied { path }, true) => {
                let ck = read_checkpoint(path)?;
                if ck.field.grid() != grid || ck.field.ncomp() < self.dim {
                    return Err(config_error("psi.forcing.path", "forcing grid does not match the run"));
                }
                Ok(Some(ck.field.slice(0..self.dim)))
            }
            _ => Ok(None),
        }
    }

    /// Validates the configuration and builds the initial state. Errors name
    /// the offending field.
    pub fn prepare(&self) -> Result<PreparedRun> {
        let mut config = self.clone();
        if config.core != "fluid" {
            return Err(config_error("core", format!("slice evolution needs the fluid core, got `{}`", config.core)));
        }
        let eta = config.resolved_eta()?;
        config.eta = Some(eta);
        if !(config.t_end.is_finite() && config.t_end >= 0.0) {
            return Err(config_error("t_end", "must be finite and non-negative"));
        }
        if config.output.every == 0 {
            return Err(config_error("output.every", "must be at least 1"));
        }
        let grid = config.grid()?;
        let v = config.initial_velocity(&grid)?;
        let vmax = v.max_abs();
        let limit = if vmax > 0.0 { CFL * grid.spacing() / vmax } else { f64::INFINITY };
        let dt = match config.dt {
            Some(dt) => {
                positive("dt", dt)?;
                if dt > limit {
                    return Err(config_error(
                        "dt",
                        format!("{dt} exceeds the advective limit {limit:.6e} = {CFL}·h/max|v0|"),
                    ));
                }
                dt
            }
            None if vmax > 0.0 => limit,
            None => CFL * grid.spacing(),
        };
        config.dt = Some(dt);
        let v = project(&v)?.with_coordinates(0.0, eta);
        let psi = config.initial_psi(&grid)?.map(|p| p.with_coordinates(0.0, eta));
        let initial = EvolutionState::new(v, psi, eta).map_err(|e| config_error("initial", e.to_string()))?;
        let forcing = config.forcing(&grid)?;
        Ok(PreparedRun {
            config,
            initial,
            forcing,
        })
    }
}

impl PreparedRun {
    pub fn integration(&self) -> Integration {
        Integration {
            dt: self.config.dt.expect("prepared runs carry dt"),
            t_end: self.config.t_end,
            closure: self.config.closure,
            forcing: self.forcing.clone(),
            output_every: self.config.output.every,
        }
    }
}

/// Result of [`run_simulation`].
#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub state: EvolutionState,
    pub csv_path: PathBuf,
    pub checkpoint_path: PathBuf,
}

/// Runs a prepared configuration and writes the diagnostics CSV and the
/// final checkpoint into `out_dir`. The checkpoint holds `v` followed by
/// `ψ` when it is evolved.
pub fn run_simulation(run: &PreparedRun, out_dir: &Path, config_hash: &str) -> Result<SimulationOutput> {
    let out = integrate(run.initial.clone(), &run.integration())?;
    let csv_path = out_dir.join(&run.config.output.csv);
    let checkpoint_path = out_dir.join(&run.config.output.checkpoint);
    write_diagnostics_csv(&csv_path, config_hash, &out.records)?;
    let state_field = match &out.state.psi {
        Some(p) => Field::stack(&[&out.state.v, p])?,
        None => out.state.v.clone(),
    };
    write_checkpoint(&checkpoint_path, &state_field, &run.config.core, config_hash)?;
    Ok(SimulationOutput {
        records: out.records,
        state: out.state,
        csv_path,
        checkpoint_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> std::result::Result<RunConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(r#"{"eta": 0.05, "t_end": 0.1}"#).unwrap();
        assert_eq!(c.closure, ClosureMode::Helmholtz);
        assert_eq!(c.initial, InitialCondition::TaylorGreen { amplitude: 1.0 });
        let p = c.prepare().unwrap();
        let h = std::f64::consts::TAU / 32.0;
        assert!((p.config.dt.unwrap() - 0.5 * h).abs() < 1e-15);
    }

    #[test]
    fn eta_from_beta_delta() {
        let c = parse(r#"{"beta": 2.0, "delta": 0.1, "t_end": 0.1}"#).unwrap();
        let p = c.prepare().unwrap();
        assert!((p.config.eta.unwrap() - 0.02).abs() < 1e-16);
        assert!((p.initial.eta - 0.02).abs() < 1e-16);
    }

    #[test]
    fn validation_names_fields() {
        let cases = [
            (r#"{"eta": -0.1, "t_end": 0.1}"#, "eta"),
            (r#"{"eta": 1.5, "t_end": 0.1}"#, "eta"),
            (r#"{"eta": 0.1, "beta": 1.0, "delta": 0.1, "t_end": 0.1}"#, "eta"),
            (r#"{"beta": 1.0, "t_end": 0.1}"#, "delta"),
            (r#"{"eta": 0.1, "t_end": 0.1, "dt": 1.0}"#, "dt"),
            (r#"{"eta": 0.1, "t_end": 0.1, "grid_size": 7}"#, "grid_size"),
            (r#"{"eta": 0.1, "t_end": 0.1, "core": "burgers"}"#, "core"),
            (r#"{"eta": 0.1, "t_end": -1.0}"#, "t_end"),
        ];
        for (text, field) in cases {
            let err = parse(text).unwrap().prepare().unwrap_err();
            assert_eq!(field_of(err), field, "{text}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse(r#"{"eta": 0.1, "t_end": 0.1, "etaa": 2}"#).is_err());
        assert!(parse(r#"{"eta": 0.1, "t_end": 0.1, "psi": {"enable": true}}"#).is_err());
        assert!(parse(r#"{"eta": 0.1, "t_end": 0.1, "initial": {"kind": "taylor_green", "amp": 1}}"#).is_err());
    }

    #[test]
    fn steady_taylor_green_energy() {
        let c = parse(r#"{"eta": 0.05, "t_end": 0.1, "closure": "none"}"#).unwrap();
        let p = c.prepare().unwrap();
        let out = integrate(p.initial.clone(), &p.integration()).unwrap();
        let e0 = out.records[0].energy;
        let drift = out.records.iter().map(|r| (r.energy - e0).abs() / e0).fold(0.0, f64::max);
        assert!(drift <= 1e-10, "{drift}");
        assert!((e0 - std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert!((out.state.t - 0.1).abs() < 1e-14);
    }

    #[test]
    fn random_helmholtz_smoke() {
        let c = parse(
            r#"{"eta": 0.05, "t_end": 0.2, "seed": 4,
                "initial": {"kind": "random_modes", "modes": 5, "kmax": 3},
                "psi": {"enabled": true, "initial": {"kind": "mode", "k": [1, 2], "amplitude": 0.1}}}"#,
        )
        .unwrap();
        let p = c.prepare().unwrap();
        let out = integrate(p.initial.clone(), &p.integration()).unwrap();
        assert!(out.records.windows(2).all(|w| w[1].t > w[0].t));
        for r in &out.records {
            assert!(r.values().iter().all(|v| v.is_finite()));
            assert!(r.max_div_v <= 1e-10);
        }
        let mut sup = 0.0f64;
        for r in &out.records {
            sup = sup.max(r.psi_max);
            assert!((r.deviation_bound - 0.05 * sup).abs() <= 1e-12);
        }
    }
}
