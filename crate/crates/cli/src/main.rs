use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use selftrig_cli::commands::{self, PredictOptions, VerifyOptions};
use selftrig_cli::{parse_config, CliError};

/// Self-triggered control: event prediction and closed-loop simulation.
#[derive(Debug, Parser)]
#[command(name = "selftrig", version)]
struct Cli {
    /// Output directory; overrides the config's output.directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress the report on standard output.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the closed loop and write trace.csv, events.csv, summary.json.
    Simulate { config: PathBuf },
    /// Predict a single event from a given state.
    Predict {
        config: PathBuf,
        /// Event time the prediction starts from.
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        /// State at t0 as comma-separated values (defaults to x0).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        state: Option<Vec<f64>>,
        /// Threshold at t0 (defaults to W0 from x0, or V(state) with --state).
        #[arg(long)]
        w: Option<f64>,
    },
    /// Check predictions against a dense-grid scan.
    Verify {
        config: PathBuf,
        /// Also run the seeded randomized-system suite.
        #[arg(long)]
        seed: Option<u64>,
        /// Scan grid step (s).
        #[arg(long, default_value_t = 1e-6)]
        grid: f64,
    },
    /// Compare numeric and closed-form minima for a one-dimensional plant.
    Scalar { config: PathBuf },
}

fn execute(cli: &Cli, w: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = parse_config(config)?;
            let dir = cli.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
            commands::simulate(&cfg, &dir, w).map(|_| ())
        }
        Command::Predict {
            config,
            t0,
            state,
            w: threshold,
        } => {
            let cfg = parse_config(config)?;
            let opts = PredictOptions {
                t0: *t0,
                state: state.clone(),
                w: *threshold,
            };
            commands::predict(&cfg, &opts, w).map(|_| ())
        }
        Command::Verify { config, seed, grid } => {
            let cfg = parse_config(config)?;
            let opts = VerifyOptions {
                grid: *grid,
                seed: *seed,
            };
            commands::verify(&cfg, &opts, w)
        }
        Command::Scalar { config } => {
            let cfg = parse_config(config)?;
            commands::scalar(&cfg, w)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SELFTRIG_LOG", "warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut sink = io::sink();
    let mut lock = stdout.lock();
    let w: &mut dyn Write = if cli.quiet { &mut sink } else { &mut lock };
    match execute(&cli, w) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
