//! `morl`: fronts, learning runs, preference sweeps and oracle queries.

mod commands;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use morl_core::MorlError;

#[derive(Parser)]
#[command(name = "morl", version, about = "Tabular multi-objective RL with Tchebycheff scalarization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate deterministic policies and write the Pareto and weak-Pareto fronts.
    Pareto {
        /// Builtin name, `random:S:A:H:m:seed`, or a JSON model file.
        env: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run one learner and write its trace and summary.
    Run {
        algorithm: Algorithm,
        /// JSON run configuration including an `env` field.
        #[arg(long)]
        config: PathBuf,
        /// Exploration dataset, required by the planning algorithms.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a learner for every preference on a simplex grid.
    Sweep {
        algorithm: SweepAlgorithm,
        #[arg(long)]
        config: PathBuf,
        /// Grid spacing; its reciprocal must be an integer.
        #[arg(long)]
        grid: f64,
        /// Reuse this exploration dataset instead of exploring once up front.
        #[arg(long, conflicts_with = "reexplore")]
        dataset: Option<PathBuf>,
        /// Explore afresh for every grid point.
        #[arg(long)]
        reexplore: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the exact scalarized minimum for one preference as JSON.
    Oracle {
        env: String,
        /// Comma-separated preference on the simplex.
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        /// Smoothing parameter; selects the smooth Tchebycheff scalarization.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = morl_core::scalarization::DEFAULT_IOTA)]
        iota: f64,
        #[arg(long, value_enum, default_value_t = Class::Stochastic)]
        class: Class,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Tchrl,
    Stchrl,
    Explore,
    PlanTch,
    PlanStch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepAlgorithm {
    Tchrl,
    Stchrl,
    PlanTch,
    PlanStch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Class {
    Deterministic,
    Stochastic,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(MorlError),
}

impl From<MorlError> for CliError {
    fn from(e: MorlError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn report(err: &CliError) {
    let body = serde_json::json!({ "error": err.kind(), "message": err.message() });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(&CliError::Usage(e.render().to_string().trim().to_string()));
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Pareto { env, out } => commands::pareto(&env, &out),
        Command::Run {
            algorithm,
            config,
            dataset,
            out,
        } => commands::run(algorithm, &config, dataset.as_deref(), &out),
        Command::Sweep {
            algorithm,
            config,
            grid,
            dataset,
            reexplore,
            out,
        } => commands::sweep(algorithm, &config, grid, dataset.as_deref(), reexplore, &out),
        Command::Oracle {
            env,
            lambda,
            mu,
            iota,
            class,
        } => commands::oracle(&env, lambda, mu, iota, class),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}
