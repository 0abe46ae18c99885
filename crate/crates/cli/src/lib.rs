//! `qdl`: reproduce the damping figures and run custom evolutions as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod run;

pub use error::CliError;

use config::RunConfig;
use figures::Fig1Variant;
use output::{output_path, sibling};

#[derive(Debug, Parser)]
#[command(name = "qdl", version, about = "Quantum damping laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file (default: <command>.csv in $QDL_OUTPUT_DIR or the working directory)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Highest quantum number of the energy basis
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    A,
    B,
    C,
}

impl From<Variant> for Fig1Variant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::A => Fig1Variant::A,
            Variant::B => Fig1Variant::B,
            Variant::C => Fig1Variant::C,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-level bouncer superposition: unmeasured (a), κ=1e-2 (b), κ=1e-1 (c)
    Fig1 {
        #[arg(long, value_enum)]
        variant: Variant,
    },
    /// Gaussian drop at h=10, σ=1, with and without measurement
    Fig2,
    /// Gaussian drop at h=10, σ=3, with and without measurement
    Fig3,
    /// Quantum decay constant against cloud width for several N
    Fig4,
    /// Evolve the system described by a TOML config
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Cross-check against the grid/ODE oracle and record the deviation
        #[arg(long)]
        oracle: bool,
    },
}

/// Run one command and return the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Fig1 { variant } => {
            let v = Fig1Variant::from(*variant);
            let path = output_path(out, &format!("{}.csv", v.name()));
            figures::fig1(v, cli.nmax)?.write(&path)?;
            Ok(vec![path])
        }
        Command::Fig2 => gaussian(out, "fig2", figures::fig2(cli.nmax)?),
        Command::Fig3 => gaussian(out, "fig3", figures::fig3(cli.nmax)?),
        Command::Fig4 => {
            if cli.nmax.is_some() {
                return Err(CliError::Config("--nmax does not apply to fig4".into()));
            }
            let path = output_path(out, "fig4.csv");
            figures::fig4()?.write(&path)?;
            Ok(vec![path])
        }
        Command::Run { config, oracle } => {
            let cfg = RunConfig::load(config)?;
            let resolved = cfg.resolve(cli.nmax)?;
            let path = match (out, &resolved.output) {
                (Some(p), _) => p.to_path_buf(),
                (None, Some(p)) => PathBuf::from(p),
                (None, None) => output_path(None, "run.csv"),
            };
            let (table, _) = run::simulate(&resolved, *oracle)?;
            table.write(&path)?;
            Ok(vec![path])
        }
    }
}

fn gaussian(out: Option<&Path>, name: &str, tables: (output::Table, output::Table)) -> Result<Vec<PathBuf>, CliError> {
    let path = output_path(out, &format!("{name}.csv"));
    let coeffs = sibling(&path, "coefficients");
    tables.0.write(&path)?;
    tables.1.write(&coeffs)?;
    Ok(vec![path, coeffs])
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
