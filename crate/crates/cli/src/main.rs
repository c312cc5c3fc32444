use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Artificial-compressibility MHD solver and verification harness.
#[derive(Parser)]
#[command(name = "acmhd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Run configuration (`key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `out_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed`
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the artificial-compressibility system
    Run {
        #[command(flatten)]
        common: Common,
        /// Drop the quadratic terms
        #[arg(long)]
        linear: bool,
        /// Also write a checkpoint every `cadence` steps
        #[arg(long)]
        checkpoints: bool,
    },
    /// Run every epsilon against a shared reference and fit rates
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated compressibility parameters
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        #[arg(long)]
        linear: bool,
    },
    /// Integrate the incompressible reference system
    Reference {
        #[command(flatten)]
        common: Common,
    },
    /// Wave-equation residuals from uniformly spaced checkpoints
    Diag {
        #[command(flatten)]
        common: Common,
        /// Checkpoint files in time order; repeat the flag
        #[arg(long = "checkpoint", required = true)]
        checkpoints: Vec<PathBuf>,
        /// The checkpoints come from a run without quadratic terms
        #[arg(long)]
        linear: bool,
    },
    /// Time-averaged local acoustic energy with and without a sponge layer
    Probe {
        #[command(flatten)]
        common: Common,
    },
}

/// Exit status for a failure: 2 for a numerical abort, 1 otherwise.
fn failure(e: &acmhd::Error) -> ExitCode {
    if e.is_numerical() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            common,
            linear,
            checkpoints,
        } => commands::run(&common, linear, checkpoints),
        Command::Sweep {
            common,
            epsilons,
            linear,
        } => commands::sweep(&common, epsilons, linear),
        Command::Reference { common } => commands::reference(&common),
        Command::Diag {
            common,
            checkpoints,
            linear,
        } => commands::diag(&common, &checkpoints, linear),
        Command::Probe { common } => commands::probe(&common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            failure(&e)
        }
    }
}
