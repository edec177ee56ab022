use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use scalelab_cli::{run_command, Command, ExperimentSpec};

/// Experiments on scale-filtered PDEs over the periodic torus.
///
/// Exit status: 0 success, 1 a check failed, 2 invalid input,
/// 3 numerical abort, 4 I/O failure.
#[derive(Parser, Debug)]
#[command(name = "scalelab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Override a configuration entry by dotted path, e.g. `psi.enabled=true`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Seed for randomized initial data and manufactured families.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let spec = ExperimentSpec {
        command: args.command,
        config: args.config,
        out: args.out,
        overrides: args.overrides,
        seed: args.seed,
    };
    match run_command(&spec) {
        Ok(outcome) => {
            println!("{}", outcome.summary.trim_end());
            for f in &outcome.files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
