use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracplasma_cli::commands::{self, Context, RunError};
use fracplasma_cli::config::ExperimentConfig;
use fracplasma_cli::report::RunReport;
use fracplasma_cli::verify;

#[derive(Debug, Parser)]
#[command(
    name = "fracplasma",
    version,
    about = "Fractional plasma problem solver and free-boundary diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// JSON configuration; the default unit-square problem when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the configuration).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed (overrides `seed` in the configuration).
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Scales the grid, vertical layers and mode count.
    #[arg(long, value_name = "FACTOR")]
    refine: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the plasma problem and write the solution and its extension.
    Solve(Common),
    /// Frequency profiles at free-boundary points.
    Frequency(Common),
    /// Blow-ups at free-boundary points.
    Blowup(Common),
    /// Steiner symmetrization of the solution.
    Symmetrize(Common),
    /// Run the acceptance checks.
    Verify(Common),
}

fn load(common: &Common) -> Result<(Context, f64, u64), RunError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default_square(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let refine = common.refine.unwrap_or(1.0);
    if common.refine.is_some() {
        config = config.refined(refine)?;
    }
    let seed = config.seed;
    Ok((Context::new(config, common.out.clone()), refine, seed))
}

fn run(command: &Command) -> Result<RunReport, RunError> {
    match command {
        Command::Solve(c) => commands::run_solve(&load(c)?.0),
        Command::Frequency(c) => commands::run_frequency(&load(c)?.0),
        Command::Blowup(c) => commands::run_blowup(&load(c)?.0),
        Command::Symmetrize(c) => commands::run_symmetrize(&load(c)?.0),
        Command::Verify(c) => {
            let (ctx, refine, seed) = load(c)?;
            verify::run_verify(&ctx, refine, seed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            if let Some(s) = &report.solver {
                match &s.error {
                    None => println!(
                        "solver: lambda={:.6e} residual={:.3e} iterations={}",
                        s.lambda.unwrap_or(f64::NAN),
                        s.residual.unwrap_or(f64::NAN),
                        s.iterations.unwrap_or(0)
                    ),
                    Some(e) => println!("solver: FAILED ({e})"),
                }
            }
            for check in &report.checks {
                println!("{check}");
            }
            ExitCode::from(commands::exit_status(&report) as u8)
        }
        Err(e @ RunError::Invalid(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
