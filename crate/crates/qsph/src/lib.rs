//! Command-line driver for `qsph-core`: config handling, CSV/JSON artifacts,
//! optional plots and the four commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod plot;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "qsph", version, about = "Quantum kernel networks for SPH")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a hybrid model to the multi-vortex field stencil task
    FitField(config::Overrides),
    /// Learn SPH kernel weights on regular or irregular particles
    TrainKernel(config::Overrides),
    /// Run one period of the rotating-cone advection benchmark
    Advect(config::Overrides),
    /// Train a grid of families, heads, levels and learning rates
    Compare(config::Overrides),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FitField(_) => "fit-field",
            Command::TrainKernel(_) => "train-kernel",
            Command::Advect(_) => "advect",
            Command::Compare(_) => "compare",
        }
    }

    fn overrides(&self) -> &config::Overrides {
        match self {
            Command::FitField(o) | Command::TrainKernel(o) | Command::Advect(o) | Command::Compare(o) => o,
        }
    }
}

/// Resolves the config, runs the command and returns a JSON summary.
pub fn run(cli: &Cli) -> CliResult<serde_json::Value> {
    let cfg = cli.command.overrides().resolve(cli.command.name())?;
    let v = match cli.command {
        Command::FitField(_) => serde_json::to_value(commands::fit_field(&cfg)?),
        Command::TrainKernel(_) => serde_json::to_value(commands::train_kernel(&cfg)?),
        Command::Advect(_) => serde_json::to_value(commands::advect(&cfg)?),
        Command::Compare(_) => serde_json::to_value(commands::compare(&cfg)?),
    };
    Ok(v.expect("summaries serialize"))
}
