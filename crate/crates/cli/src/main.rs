mod commands;
mod config;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Context;
use config::RunConfig;
use table::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(#[from] stepcds_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("{0} verification check(s) failed")]
    Verify(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Verify(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    /// Path counts from `mc.n_paths`.
    Full,
    /// Path counts from `mc.test_paths`, for quick checks.
    Test,
}

/// Perpetual step-up/step-down default swaps under spectrally negative
/// Levy models.
#[derive(Debug, Parser)]
#[command(name = "stepcds", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "stepcds.toml")]
    config: PathBuf,
    /// CSV destination; overrides `output.csv`. Standard output otherwise.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Simulation seed; overrides `mc.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Full)]
    profile: Profile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrated model parameters and the roots behind the scale function.
    Calibrate,
    /// W, W', Z and zeta on the sweep grid.
    ScaleTable,
    /// Contract value split into its CDS and option legs.
    Price,
    /// Premium that makes the contract worthless at inception.
    Spread,
    /// Optimal buyer and seller thresholds.
    Threshold,
    /// Spreads or thresholds along the configured sweep.
    Sweep,
    /// Finite-maturity bounds and the simulated value of the perpetual rule.
    Finite,
    /// Analytic values against simulation.
    Simulate {
        /// Also write every simulated path to this CSV file.
        #[arg(long)]
        dump_paths: Option<PathBuf>,
    },
    /// Runs the invariant suite; exits with 4 when a check fails.
    Verify,
}

fn write_table(table: &Table, dest: Option<&Path>, digits: usize) -> Result<(), CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::Output(e.to_string());
    match dest {
        Some(path) => {
            let file = File::create(path).map_err(|e| err(&format!("{}: {e}", path.display())))?;
            table.write(BufWriter::new(file), digits).map_err(|e| err(&e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock, digits).map_err(|e| err(&e))?;
            lock.flush().map_err(|e| err(&e))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(&cli.config)?;
    let digits = cfg.output.precision;
    let dest = cli.output.clone().or_else(|| cfg.output.csv.clone());
    let ctx = Context::new(cfg, cli.profile == Profile::Test, cli.seed)?;
    let table = match cli.command {
        Command::Calibrate => commands::calibrate(&ctx)?,
        Command::ScaleTable => commands::scale_table(&ctx)?,
        Command::Price => commands::price(&ctx)?,
        Command::Spread => commands::spread(&ctx)?,
        Command::Threshold => commands::threshold(&ctx)?,
        Command::Sweep => commands::sweep(&ctx)?,
        Command::Finite => commands::finite(&ctx)?,
        Command::Simulate { dump_paths } => {
            let (table, paths) = commands::simulate(&ctx, dump_paths.is_some())?;
            if let (Some(path), Some(paths)) = (dump_paths.as_deref(), paths) {
                write_table(&paths, Some(path), digits)?;
            }
            table
        }
        Command::Verify => {
            let (table, failed) = commands::verify(&ctx)?;
            write_table(&table, dest.as_deref(), digits)?;
            return if failed > 0 { Err(CliError::Verify(failed)) } else { Ok(()) };
        }
    };
    write_table(&table, dest.as_deref(), digits)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stepcds: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
