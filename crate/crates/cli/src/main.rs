//! `kirchhoff` command-line driver.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 non-convergence
//! or a failed quality bound, 4 vortex collision, 5 aliased beam spectrum.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kirchhoff::Error;

use config::{PolyFamily, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "kirchhoff",
    version,
    about = "Point vortices, Stieltjes equilibria, Laughlin quasiholes and optical vortices"
)]
pub struct Cli {
    /// JSON configuration with one object per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files; nothing is written without it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Command-specific tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized initial data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Suppress stdout reports and warnings.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orthogonal polynomial zeros and ODE residuals.
    Zeros(ZerosArgs),
    /// Stieltjes equilibrium, certified against polynomial zeros.
    Equilibrium(EquilibriumArgs),
    /// Integrate the point-vortex equations.
    Simulate(SimulateArgs),
    /// Planar Laughlin stationarity.
    Laughlin(LaughlinArgs),
    /// Propagate a Laguerre-Gaussian beam and track its vortices.
    Beam(BeamArgs),
}

#[derive(Args, Debug, Default)]
pub struct ZerosArgs {
    #[arg(long, value_enum)]
    pub family: Option<PolyFamily>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BackgroundName {
    Hermite,
    Coulomb,
    Jacobi,
}

#[derive(Args, Debug, Default)]
pub struct EquilibriumArgs {
    #[arg(long, value_enum)]
    pub family: Option<BackgroundName>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Coulomb angular momentum.
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,
    /// Fixed charge at +1.
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Fixed charge at -1.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct LaughlinArgs {
    /// Number of particles.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m_exp: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub l_b: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct BeamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub ell: Option<i32>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub w0: Option<f64>,
    /// Samples per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub dx: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Propagation distance in Rayleigh ranges.
    #[arg(long, allow_negative_numbers = true)]
    pub z_end: Option<f64>,
    #[arg(long)]
    pub slices: Option<usize>,
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Collision { .. } | Error::StepUnderflow { .. } => 4,
        Error::NonConvergence(_)
        | Error::PlanarNonConvergence { .. }
        | Error::EigenNonConvergence(_)
        | Error::StepLimit { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Warn })
        .parse_env("KIRCHHOFF_LOG")
        .format_timestamp(None)
        .init();

    let outcome = RunConfig::load(cli.config.as_deref()).and_then(|cfg| commands::run(&cli, &cfg));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Some(dir) = &cli.out {
        if let Err(e) = write_outputs(dir, &outcome.files) {
            eprintln!("error: writing outputs to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if !cli.quiet {
        print!("{}", outcome.stdout);
    }
    if let Some(msg) = &outcome.message {
        eprintln!("{msg}");
    }
    ExitCode::from(outcome.code)
}

fn write_outputs(dir: &std::path::Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    if files.is_empty() {
        return Ok(());
    }
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}
