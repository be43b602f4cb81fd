//! Experiment runner for sparse-vector detection simulations.
//!
//! Exit codes: 0 success, 2 configuration or parameter error, 3 capacity
//! error (exact enumeration too large), 1 I/O failure. The environment
//! variable `SPARSEDETECT_WORKERS` overrides the worker count and nothing
//! else; seeds always come from configs or flags.

mod commands;
mod config;
mod csvfmt;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{cmd_bounds, cmd_calibrate, cmd_phase, cmd_simulate, exit_code, CliError, PhaseArgs};

#[derive(Parser)]
#[command(name = "sparsedetect", version, about = "Sparse-vector detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the experiment TOML config.
    #[arg(long)]
    config: PathBuf,
    /// Override any scalar config key: --set experiment.trials=5000.
    #[arg(long = "set", value_parser = parse_key_value)]
    set: Vec<(String, String)>,
    /// Shorthand for --set experiment.trials=N.
    #[arg(long)]
    trials: Option<u64>,
    /// Shorthand for --set experiment.master_seed=N.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut all = self.set.clone();
        if let Some(t) = self.trials {
            all.push(("experiment.trials".into(), t.to_string()));
        }
        if let Some(s) = self.seed {
            all.push(("experiment.master_seed".into(), s.to_string()));
        }
        all
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and write a CSV plus a JSON summary.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Override the CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Override the JSON summary output path.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Calibrate null thresholds and write a reusable JSON table.
    Calibrate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output path of the threshold table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the closed-form bound chain for one instance as JSON.
    Bounds {
        /// Prior kind: nonneg, signed, or interval.
        #[arg(long)]
        prior: String,
        #[arg(long)]
        n: usize,
        /// Measurement budget (count or energy; need not be an integer).
        #[arg(long)]
        m: f64,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        mu: f64,
    },
    /// Sweep mu on a log grid with the matching detector and bound columns.
    Phase {
        /// "nonneg" (constant scheme + sum test) or "general"
        /// (Bernoulli blocks + block-energy test, calibrated).
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        s: usize,
        #[arg(long = "mu-min")]
        mu_min: f64,
        #[arg(long = "mu-max")]
        mu_max: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Block count for the general kind (default grows slowly with m).
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn parse_key_value(raw: &str) -> Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got \"{raw}\""))
}

fn configure_workers() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("SPARSEDETECT_WORKERS") {
        let workers: usize = raw
            .parse()
            .map_err(|_| CliError::Config(format!("SPARSEDETECT_WORKERS: invalid value \"{raw}\"")))?;
        if workers == 0 {
            return Err(CliError::Config("SPARSEDETECT_WORKERS: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("SPARSEDETECT_WORKERS: {e}")))?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    configure_workers()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, csv, summary } => {
            cmd_simulate(&config.config, &config.overrides(), csv, summary)
        }
        Command::Calibrate { config, out } => {
            cmd_calibrate(&config.config, &config.overrides(), out)
        }
        Command::Bounds { prior, n, m, s, mu } => cmd_bounds(&prior, n, m, s, mu),
        Command::Phase {
            kind,
            n,
            m,
            s,
            mu_min,
            mu_max,
            points,
            trials,
            seed,
            alpha,
            h,
            csv,
            summary,
        } => cmd_phase(&PhaseArgs {
            kind,
            n,
            m,
            s,
            mu_min,
            mu_max,
            points,
            trials,
            seed,
            alpha,
            h,
            csv,
            summary,
        }),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
