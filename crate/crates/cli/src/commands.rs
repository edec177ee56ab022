//! Experiment dispatch. Each command validates its configuration before
//! computing anything, writes its artifacts into the output directory and
//! reports a one-paragraph summary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use scalelab::burgers::{characteristic_solution, reference_burgers};
use scalelab::config::{run_simulation, RunConfig};
use scalelab::experiments::{
    burgers_residual_stack, closure_suite, defect_convergence, duhamel_families, duhamel_study, filter_suite,
    frechet_study, manufactured_residual_stack, BoundStudy, BurgersSetup, Check, ConvergenceStudy, FamilyKind,
    SuiteReport,
};
use scalelab::fluid::{burgers_core_expr, fluid_core_expr};
use scalelab::io::table_csv;
use scalelab::jet::{derive_source, parse_core, JetExpr};
use scalelab::spectral::make_grid;

use crate::config::{
    config_hash, load_value, typed, BurgersConfig, ClosureCheckConfig, DeriveSourceConfig, DuhamelCheckConfig,
    FilterCheckConfig, ResidualCheckConfig, ResidualStudy,
};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    FilterCheck,
    DeriveSource,
    ResidualCheck,
    ClosureCheck,
    DuhamelCheck,
    Evolve,
    BurgersReference,
}

impl Command {
    fn takes_seed(self) -> bool {
        !matches!(self, Command::DeriveSource | Command::BurgersReference)
    }
}

/// A fully specified invocation.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

/// What a successful command produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn read_config(spec: &ExperimentSpec) -> Result<Value, CliError> {
    let text = match &spec.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = spec.overrides.clone();
    if let (Some(seed), true) = (spec.seed, spec.command.takes_seed()) {
        overrides.push(format!("seed={seed}"));
    }
    load_value(&text, &overrides)
}

struct Writer<'a> {
    dir: &'a Path,
    hash: String,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path, hash: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            hash,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, config: &T, body: Value) -> Result<(), CliError> {
        let doc = json!({ "config_hash": self.hash, "config": config, "report": body });
        self.write(name, &(serde_json::to_string_pretty(&doc).expect("reports serialize") + "\n"))
    }

    fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let text = table_csv(&self.hash, columns, rows);
        self.write(name, &text)
    }
}

fn finish(summary: String, files: Vec<PathBuf>, checks: &[&SuiteReport]) -> Result<Outcome, CliError> {
    let failed: Vec<String> = checks
        .iter()
        .flat_map(|r| r.failures().into_iter().map(move |c| format!("{}/{}", r.suite, c.name)))
        .collect();
    if failed.is_empty() {
        Ok(Outcome { summary, files })
    } else {
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}

fn summarize(report: &SuiteReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let rel = if c.upper { "<=" } else { ">=" };
        let mark = if c.passed { "ok" } else { "FAILED" };
        out.push_str(&format!("{}: {} = {:.3e} ({rel} {:e}) {mark}\n", report.suite, c.name, c.value, c.limit));
    }
    out
}

pub fn run_command(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    let value = read_config(spec)?;
    match spec.command {
        Command::FilterCheck => filter_check(typed(value)?, &spec.out),
        Command::DeriveSource => derive(typed(value)?, &spec.out),
        Command::ResidualCheck => residual_check(typed(value)?, &spec.out),
        Command::ClosureCheck => closure_check(typed(value)?, &spec.out),
        Command::DuhamelCheck => duhamel_check(typed(value)?, &spec.out),
        Command::Evolve => evolve(typed(value)?, &spec.out),
        Command::BurgersReference => burgers(typed(value)?, &spec.out),
    }
}

fn filter_check(config: FilterCheckConfig, out: &Path) -> Result<Outcome, CliError> {
    let report = filter_suite(config.seed, config.tolerance)?;
    let mut w = Writer::new(out, config_hash(&config))?;
    w.json("filter_report.json", &config, serde_json::to_value(&report).unwrap())?;
    finish(summarize(&report), w.files, &[&report])
}

/// Resolves `fluid`, `burgers` or literal core text.
pub fn resolve_core(config: &DeriveSourceConfig) -> Result<JetExpr, CliError> {
    match config.core.as_str() {
        "fluid" => {
            if !(1..=2).contains(&config.dim) {
                return Err(CliError::Validation(format!("dim must be 1 or 2, got {}", config.dim)));
            }
            Ok(fluid_core_expr(config.dim))
        }
        "burgers" => Ok(burgers_core_expr()),
        text => Ok(parse_core(text)?),
    }
}

/// `s = …` for one component, `s1 = …`, `s2 = …` otherwise.
pub fn format_source(source: &JetExpr) -> String {
    if source.len() == 1 {
        return format!("s = {}", source.component(0));
    }
    source
        .components()
        .iter()
        .enumerate()
        .map(|(i, p)| format!("s{} = {p}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

fn derive(config: DeriveSourceConfig, out: &Path) -> Result<Outcome, CliError> {
    let core = resolve_core(&config)?;
    let text = format_source(&derive_source(&core));
    let hash = config_hash(&config);
    let mut w = Writer::new(out, hash.clone())?;
    w.write("source.txt", &format!("# config_hash={hash}\n{text}\n"))?;
    Ok(Outcome {
        summary: text,
        files: w.files,
    })
}

fn residual_check(config: ResidualCheckConfig, out: &Path) -> Result<Outcome, CliError> {
    let kind = FamilyKind::by_name(&config.family)?;
    if config.levels < 2 {
        return Err(CliError::Validation("levels must be at least 2".into()));
    }
    if !(config.h > 0.0) {
        return Err(CliError::Validation("h must be positive".into()));
    }
    let steps: Vec<f64> = (0..config.levels)
        .rev()
        .map(|i| config.h * 2f64.powi(i as i32))
        .collect();
    if config.eta - 2.0 * steps[0] <= 0.0 {
        return Err(CliError::Validation(format!(
            "eta = {} is too small for a coarsest spacing of {}",
            config.eta, steps[0]
        )));
    }
    let (study, column, extra) = match config.study {
        ResidualStudy::Defect => (defect_convergence(kind, config.seed, config.eta, &steps)?, "max_e", None),
        ResidualStudy::Frechet => {
            if kind == FamilyKind::TaylorGreen {
                return Err(CliError::Validation(
                    "the frechet study uses the multimode or burgers families".into(),
                ));
            }
            let s = frechet_study(kind, config.seed, config.eta, &steps)?;
            let finest = Check::at_most("finest relative discrepancy", s.finest().error, 0.05);
            (s, "relative_discrepancy", Some(finest))
        }
    };
    let mut checks = vec![Check::at_least("measured order", study.min_order(), config.min_order)];
    checks.extend(extra);
    let report = SuiteReport::new(format!("residual/{}", kind.name()), checks);
    let mut w = Writer::new(out, config_hash(&config))?;
    let rows: Vec<Vec<f64>> = study
        .rows
        .iter()
        .map(|r| vec![r.step, r.error, r.order.unwrap_or(f64::NAN)])
        .collect();
    let name = format!("residual_{}_{}.csv", kind.name(), column_tag(config.study));
    w.csv(&name, &["delta_eta", column, "order"], &rows)?;
    w.json(
        &name.replace(".csv", ".json"),
        &config,
        json!({ "study": study, "checks": report }),
    )?;
    let mut summary = format_study(&study);
    summary.push_str(&summarize(&report));
    finish(summary, w.files, &[&report])
}

fn column_tag(study: ResidualStudy) -> &'static str {
    match study {
        ResidualStudy::Defect => "defect",
        ResidualStudy::Frechet => "frechet",
    }
}

fn format_study(study: &ConvergenceStudy) -> String {
    let mut s = format!("{}\n", study.name);
    for r in &study.rows {
        match r.order {
            Some(o) => s.push_str(&format!("  step {:.4e}  error {:.4e}  order {o:.3}\n", r.step, r.error)),
            None => s.push_str(&format!("  step {:.4e}  error {:.4e}\n", r.step, r.error)),
        }
    }
    s
}

fn closure_check(config: ClosureCheckConfig, out: &Path) -> Result<Outcome, CliError> {
    let suite = closure_suite(config.seed)?;
    let limit = 1.0 + config.slack;
    let manufactured = BoundStudy::from_stack(
        "manufactured r = eta exp(-2 eta) sin x",
        &manufactured_residual_stack(
            |e| e * (-2.0 * e).exp(),
            config.manufactured_epsilon,
            config.manufactured_eta0,
            config.nodes,
        )?,
    )?;
    let linear = BoundStudy::from_stack(
        "manufactured r = eta sin x",
        &manufactured_residual_stack(|e| e, config.manufactured_epsilon, config.manufactured_eta0, config.nodes)?,
    )?;
    let setup = BurgersSetup::new(1024, 64, config.burgers_t)?;
    let burgers = BoundStudy::from_stack(
        "filtered burgers",
        &burgers_residual_stack(&setup, config.burgers_epsilon, config.burgers_eta0, config.nodes)?,
    )?;
    let studies = [manufactured, linear, burgers];
    let bound = SuiteReport::new(
        "bound",
        studies
            .iter()
            .map(|s| Check::at_most(format!("{}: max lhs/rhs", s.name), s.worst_ratio(1e-12), limit))
            .collect(),
    );
    let mut w = Writer::new(out, config_hash(&config))?;
    w.json(
        "closure_report.json",
        &config,
        json!({ "closure": suite, "bound": bound, "bound_studies": studies }),
    )?;
    let mut summary = summarize(&suite);
    summary.push_str(&summarize(&bound));
    for s in &studies {
        summary.push_str(&format!("{}: epsilon = {:.1e}, max|r(epsilon)| = {:.3e}\n", s.name, s.epsilon, s.r_at_epsilon));
    }
    finish(summary, w.files, &[&suite, &bound])
}

fn duhamel_check(config: DuhamelCheckConfig, out: &Path) -> Result<Outcome, CliError> {
    if config.counts.len() < 2 || config.counts.windows(2).any(|w| w[1] != 2 * w[0] - 1) {
        return Err(CliError::Validation(
            "counts must list at least two node counts, each halving the previous spacing".into(),
        ));
    }
    let mut checks = Vec::new();
    let mut studies = Vec::new();
    for (name, fam) in duhamel_families(config.seed)? {
        let s = duhamel_study(&name, &fam, config.epsilon, config.eta_end, &config.counts)?;
        checks.push(Check::at_least(format!("{name}: reconstruction order"), s.convergence.min_order(), config.min_order));
        checks.push(Check::at_most(
            format!("{name}: max|u - ubar| / (eta sup|psi|)"),
            s.worst_bound_ratio,
            1.0 + config.bound_slack,
        ));
        studies.push(s);
    }
    let report = SuiteReport::new("duhamel", checks);
    let mut w = Writer::new(out, config_hash(&config))?;
    w.json("duhamel_report.json", &config, json!({ "studies": studies, "checks": report }))?;
    let mut summary: String = studies.iter().map(|s| format_study(&s.convergence)).collect();
    summary.push_str(&summarize(&report));
    finish(summary, w.files, &[&report])
}

fn evolve(config: RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let run = config.prepare()?;
    let hash = config_hash(&run.config);
    let mut w = Writer::new(out, hash.clone())?;
    w.write(
        "resolved_config.json",
        &(serde_json::to_string_pretty(&json!({ "config_hash": hash, "config": run.config })).unwrap() + "\n"),
    )?;
    let result = run_simulation(&run, out, &hash)?;
    let last = result.records.last().expect("runs record the initial state");
    let summary = format!(
        "eta = {:e}, dt = {:e}, steps = {}, t = {}, energy = {:.12e}, max div v = {:.3e}, bound = {:.6e}",
        run.config.eta.unwrap(),
        run.config.dt.unwrap(),
        result.state.step_count,
        result.state.t,
        last.energy,
        last.max_div_v,
        last.deviation_bound,
    );
    let mut files = w.files;
    files.push(result.csv_path);
    files.push(result.checkpoint_path);
    Ok(Outcome { summary, files })
}

fn burgers(config: BurgersConfig, out: &Path) -> Result<Outcome, CliError> {
    let grid = make_grid(1, config.grid_size)?;
    let snap = reference_burgers(&grid, config.t_end, config.dt)?;
    let oracle = characteristic_solution(&grid, config.t_end)?;
    let err = snap.u.max_abs_diff(&oracle);
    let report = SuiteReport::new("burgers", vec![Check::at_most("max |u - characteristics|", err, 1e-10)]);
    let rows: Vec<Vec<f64>> = (0..grid.num_points())
        .map(|i| vec![grid.point(i)[0], snap.u.values()[i], oracle.values()[i]])
        .collect();
    let mut w = Writer::new(out, config_hash(&config))?;
    w.csv("burgers_reference.csv", &["x", "u", "u_characteristics"], &rows)?;
    w.json(
        "burgers_reference.json",
        &config,
        json!({ "steps": snap.steps, "checks": report }),
    )?;
    finish(summarize(&report), w.files, &[&report])
}
