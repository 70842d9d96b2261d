use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

mod config;
mod error;
mod run;

use config::{BranchConfig, ZConfig};
use error::CliError;
use run::{Command, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    /// Eigenvalues and eigenvectors of the star Hamiltonian.
    Spectrum,
    /// Amplitude trajectories from a basis state.
    Evolve,
    /// W-state generation plan.
    Wgen,
    /// Generation error against a product fluctuation.
    SweepFluct,
    /// Transfer fidelity curves and the coupling program.
    Transfer,
    /// Effective anisotropy over ring or linker parameters.
    SweepAniso,
    /// Cross-check of analytic, numerical and full-space propagation.
    Validate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ZArg {
    Halfspin,
    Pauli,
}

/// Batch runner for star-coupled molecular-ring networks.
#[derive(Debug, Parser)]
#[command(name = "molring", version)]
struct Args {
    command: CommandArg,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Winding number; overrides `protocol.k`.
    #[arg(long)]
    k: Option<u32>,
    /// Root branch for site-sourced W plans; overrides `protocol.branch`.
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// S^z convention of the full-space oracle; overrides `protocol.z_convention`.
    #[arg(long, value_enum)]
    z_convention: Option<ZArg>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", args.config.display())))?;
    let config = config::parse(&text)?;
    let command = match args.command {
        CommandArg::Spectrum => Command::Spectrum,
        CommandArg::Evolve => Command::Evolve,
        CommandArg::Wgen => Command::Wgen,
        CommandArg::SweepFluct => Command::SweepFluct,
        CommandArg::Transfer => Command::Transfer,
        CommandArg::SweepAniso => Command::SweepAniso,
        CommandArg::Validate => Command::Validate,
    };
    let overrides = Overrides {
        k: args.k,
        branch: args.branch.map(|b| match b {
            BranchArg::Plus => BranchConfig::Plus,
            BranchArg::Minus => BranchConfig::Minus,
        }),
        z_convention: args.z_convention.map(|z| match z {
            ZArg::Halfspin => ZConfig::Halfspin,
            ZArg::Pauli => ZConfig::Pauli,
        }),
    };
    let outputs = run::run(command, &config, overrides, &args.out)?;
    for o in &outputs {
        fs::write(&o.path, &o.bytes)?;
        println!("wrote {} ({} rows)", o.path.display(), o.rows);
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
