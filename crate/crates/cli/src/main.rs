//! Command-line front end: spectral sweeps, benchmark simulation,
//! convergence studies, and scheme-vs-HHT comparison, all emitting
//! deterministic CSV.
//!
//! Exit codes: 0 on success, 2 on usage/config errors, 3 when an
//! integration diverges.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use commands::CliError;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "padetime",
    version,
    about = "High-order implicit time integration for structural dynamics with controllable numerical dissipation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dissipation/dispersion curves over dt/T, optionally next to HHT-alpha
    Spectral(SpectralArgs),
    /// Integrate a benchmark problem and emit probe histories
    Simulate(SimulateArgs),
    /// Convergence study on a forced oscillator with halved time steps
    Convergence(ConvergenceArgs),
    /// The same problem under the scheme and under HHT-alpha, side by side
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    /// Stiff two-spring chain driven through a massless support
    ThreeDof,
    /// Homogeneous fixed-free rod under an end step load, uniform mesh
    Rod,
    /// The same rod on a sinusoidally graded mesh
    RodNonuniform,
    /// Two-segment rod with a 10:1 impedance contrast
    Bimaterial,
    /// Scalar wave in a clamped square with an initial velocity patch
    ScalarWave,
}

impl FromStr for Problem {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        ValueEnum::from_str(s, true).map_err(|_| {
            CliError::Usage(format!(
                "unknown problem `{s}`; expected three-dof, rod, rod-nonuniform, bimaterial, or scalar-wave"
            ))
        })
    }
}

#[derive(clap::Args)]
pub struct SpectralArgs {
    /// Denominator order M of the expansion
    #[arg(long = "M", value_name = "M")]
    order: Option<usize>,
    /// Spectral radius in the high-frequency limit, in [0, 1]
    #[arg(long, allow_negative_numbers = true)]
    rho_inf: Option<f64>,
    /// Also evaluate HHT-alpha at this alpha (adds hht_* columns)
    #[arg(long, allow_negative_numbers = true)]
    hht_alpha: Option<f64>,
    /// Lower end of the dt/T grid
    #[arg(long)]
    x_min: Option<f64>,
    /// Upper end of the dt/T grid
    #[arg(long)]
    x_max: Option<f64>,
    /// Number of log-spaced grid points
    #[arg(long)]
    points: Option<usize>,
    /// Output CSV path ("-" for stdout)
    #[arg(long)]
    out: Option<String>,
    /// Flat key = value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    /// Element count (per segment for bimaterial, per side for scalar-wave)
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long = "M", value_name = "M")]
    order: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    rho_inf: Option<f64>,
    /// Fixed time step (alternative to --cfl)
    #[arg(long)]
    dt: Option<f64>,
    /// Time step as a CFL number against the problem's mesh
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    /// Force-expansion order override
    #[arg(long = "pf")]
    force_order: Option<usize>,
    /// Probe DOF indices (repeatable); defaults to the problem's probes
    #[arg(long)]
    probe: Vec<usize>,
    /// Append analytical reference columns when the problem has one
    #[arg(long)]
    reference: bool,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct ConvergenceArgs {
    #[arg(long = "M", value_name = "M")]
    order: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    rho_inf: Option<f64>,
    /// Number of step-halving levels starting from dt = 1/20
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long = "pf")]
    force_order: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct CompareArgs {
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long = "M", value_name = "M")]
    order: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    rho_inf: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    /// HHT dissipation parameter; defaults to the alpha matching rho_inf
    #[arg(long, allow_negative_numbers = true)]
    hht_alpha: Option<f64>,
    /// CFL number for the HHT run on meshed problems
    #[arg(long)]
    hht_cfl: Option<f64>,
    #[arg(long = "pf")]
    force_order: Option<usize>,
    #[arg(long)]
    probe: Vec<usize>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectral(args) => commands::run_spectral(args),
        Command::Simulate(args) => commands::run_simulate(args),
        Command::Convergence(args) => commands::run_convergence(args),
        Command::Compare(args) => commands::run_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Divergence { step }) => {
            eprintln!("error: integration diverged at step {step}");
            ExitCode::from(3)
        }
    }
}
