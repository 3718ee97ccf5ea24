//! Binary entry point: parses flags, loads and overrides the JSON run
//! configuration, dispatches one subcommand, and maps outcomes onto the
//! exit-code contract (0 ok, 1 verification failure, 2 config error,
//! 3 numerical abort). All numerics live in the library; this binary only
//! routes and formats.

mod commands;
mod config;
mod error;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use config::{Overrides, RunConfig};
use error::{CliError, Status};

#[derive(Parser)]
#[command(
    name = "gpberry",
    version,
    about = "Semiclassical states, moment dynamics, and geometric phases of the \
             1-D nonlocal Gross-Pitaevskii equation with a quadratic kernel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration (required by every subcommand).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the interaction strength κ̃ = κ‖Ψ‖².
    #[arg(long, global = true, value_name = "X")]
    kappa_tilde: Option<f64>,

    /// Override the propagator step.
    #[arg(long, global = true, value_name = "DT")]
    dt: Option<f64>,

    /// Override the Fock levels (comma-separated).
    #[arg(long, global = true, value_delimiter = ',', value_name = "N,..")]
    levels: Option<Vec<usize>>,

    /// Override the loop periods T (comma-separated).
    #[arg(long, global = true, value_delimiter = ',', value_name = "T,..")]
    periods: Option<Vec<f64>>,

    /// Override the number of grid points.
    #[arg(long, global = true, value_name = "N")]
    n_points: Option<usize>,

    /// Override the propagated time span.
    #[arg(long, global = true, value_name = "T")]
    time_span: Option<f64>,

    /// Override the output directory for file-writing commands.
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form level energies with Rayleigh/residual certificates (CSV).
    Spectrum,
    /// Moment-system trajectory along the loop (CSV).
    Hes,
    /// Variations (germ) trajectory along the loop (CSV).
    Germ,
    /// Geometric-phase report: closed forms plus PDE extraction per (n, T).
    Berry,
    /// Hannay angle and the geometric-phase ladder (JSON).
    Hannay,
    /// Propagate the configured packet; write states and a run manifest.
    Propagate,
    /// Run the invariant suite; exit 0 iff every check passes (JSON).
    Verify,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            kappa_tilde: self.kappa_tilde,
            dt: self.dt,
            levels: self.levels.clone(),
            periods: self.periods.clone(),
            n_points: self.n_points,
            time_span: self.time_span,
            output_dir: self.output_dir.clone(),
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <FILE> is required".into()))?;
    let mut config = RunConfig::load(path)?;
    cli.overrides().apply(&mut config);
    let ctx = Context::new(config)?;
    match cli.command {
        Command::Spectrum => commands::spectrum::run(&ctx, out),
        Command::Hes => commands::trajectories::run_hes(&ctx, out),
        Command::Germ => commands::trajectories::run_germ(&ctx, out),
        Command::Berry => commands::phase_reports::run_berry(&ctx, out),
        Command::Hannay => commands::phase_reports::run_hannay(&ctx, out),
        Command::Propagate => commands::propagate::run(&ctx, out),
        Command::Verify => commands::verify::run(&ctx, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match dispatch(&cli, &mut stdout.lock()) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(1),
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical abort: {msg}");
            ExitCode::from(3)
        }
    }
}
