//! Command-line experiments for friendship paradox statistics on circular
//! random geometric graphs.
//!
//! The binary is a thin wrapper over [`run`]; everything here is public so
//! integration tests can drive the commands in-process.

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rgg_paradox::DensitySpec;

pub use commands::run;

#[derive(Debug, Parser)]
#[command(
    name = "rgg-paradox",
    version,
    about = "Friendship paradox experiments on circular random geometric graphs"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate tau_f over a kappa × mu grid.
    Tau(TauArgs),
    /// Sample one graph and report its friendship paradox statistic.
    Simulate(SimulateArgs),
    /// Replicated convergence study over a grid of n.
    Converge(ConvergeArgs),
    /// Compare Monte Carlo motif probabilities with exact and asymptotic values.
    VerifyMoments(VerifyMomentsArgs),
    /// Check the sweep construction against the all-pairs oracle.
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityChoice {
    Uniform,
    Vonmises,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub density: Option<DensityChoice>,
    /// Von Mises concentration.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Von Mises location phase.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Two-column CSV `x,f` on an equispaced grid.
    #[arg(long)]
    pub density_file: Option<PathBuf>,
}

impl DensityArgs {
    /// `None` when no density flag was given.
    pub fn spec(&self) -> Result<Option<DensitySpec>, CliError> {
        let choice = match self.density {
            Some(c) => c,
            None if self.density_file.is_some() => DensityChoice::Csv,
            None if self.kappa.is_some() || self.mu.is_some() => DensityChoice::Vonmises,
            None => return Ok(None),
        };
        let spec = match choice {
            DensityChoice::Uniform => DensitySpec::Uniform,
            DensityChoice::Vonmises => DensitySpec::VonMises {
                kappa: self
                    .kappa
                    .ok_or_else(|| CliError::Usage("--density vonmises needs --kappa".into()))?,
                mu: self.mu.unwrap_or(0.0),
            },
            DensityChoice::Csv => DensitySpec::Csv {
                path: self
                    .density_file
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("--density csv needs --density-file".into()))?
                    .to_string_lossy()
                    .into_owned(),
            },
        };
        Ok(Some(spec))
    }

    pub fn spec_or_uniform(&self) -> Result<DensitySpec, CliError> {
        Ok(self.spec()?.unwrap_or(DensitySpec::Uniform))
    }
}

#[derive(Debug, Clone, Args)]
pub struct TauArgs {
    /// Concentrations (defaults to the five reference values).
    #[arg(long, value_delimiter = ',')]
    pub kappa: Vec<f64>,
    /// Location phases (defaults to 0.1, 0.3, 0.5).
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub density: DensityArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: f64,
    /// Per-node CSV: node, position, degree, delta.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Edge list CSV (n up to 20000).
    #[arg(long)]
    pub edges: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleChoice {
    Fixed,
    PowerLaw,
    Lambda,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub density: DensityArgs,
    /// JSON experiment grid; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleChoice>,
    /// Radius for the fixed rule.
    #[arg(long)]
    pub r: Option<f64>,
    /// Power-law prefactor, `r = c n^-alpha`.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Holds `n r^3` fixed at this value.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Slack factor for the trend verdict.
    #[arg(long)]
    pub slack: Option<f64>,
    /// Record per-row wall time (makes output nondeterministic).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyMomentsArgs {
    #[command(flatten)]
    pub density: DensityArgs,
    #[arg(long = "r", value_delimiter = ',', default_values_t = vec![0.04, 0.02, 0.01])]
    pub radii: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.005, 0.3, 0.995])]
    pub anchors: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec!["edge".to_string(), "cherry".into(), "path".into(), "triangle".into()])]
    pub motifs: Vec<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Also write the order table as CSV here.
    #[arg(long)]
    pub orders: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleCheckArgs {
    #[command(flatten)]
    pub density: DensityArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1000])]
    pub n: Vec<usize>,
    #[arg(long = "r", value_delimiter = ',', default_values_t = vec![0.005, 0.02, 0.1])]
    pub radii: Vec<f64>,
    /// Instances per `(n, r)` cell.
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rgg_paradox::Error),
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for usage and I/O problems, 3 for parameters the model rejects.
    pub fn exit_code(&self) -> i32 {
        use rgg_paradox::Error as E;
        match self {
            CliError::Core(E::Io(_) | E::Csv(_)) => 1,
            CliError::Core(_) => 3,
            _ => 1,
        }
    }
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
        }
    }
}
