use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod manifest;

use error::{CliError, EXIT_INTERNAL};

/// Influence estimation for retweet/mention activity on a followers network.
#[derive(Debug, Parser)]
#[command(name = "cpinfluence", version, about)]
pub struct Cli {
    /// Random seed; overrides any `seed` in a config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic network and action log.
    Simulate(SimulateArgs),
    /// Fit response and susceptibility parameters by Newton's method.
    Estimate(EstimateArgs),
    /// Score and rank accounts from fitted parameters.
    Influence(InfluenceArgs),
    /// PageRank over the followers network.
    Pagerank(PagerankArgs),
    /// Ordinary least squares on a numeric CSV table.
    Regress(RegressArgs),
    /// Compare influence scores and PageRank against external scores.
    Compare(CompareArgs),
    /// Simulation sweep over account and topic counts.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,

    /// Replicate index, selecting the random stream.
    #[arg(long, default_value_t = 0)]
    pub replicate: usize,
}

#[derive(Debug, Args)]
pub struct LogArgs {
    #[arg(long)]
    pub events: PathBuf,

    /// Edge list `influencer,follower`.
    #[arg(long)]
    pub network: PathBuf,

    /// Account count (default: largest id in the network file).
    #[arg(long)]
    pub n: Option<usize>,

    /// Topic count (default: largest topic id in the events file).
    #[arg(long)]
    pub topics: Option<usize>,

    /// Observation horizon in days (default: latest event time).
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub log: LogArgs,

    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct InfluenceArgs {
    #[command(flatten)]
    pub log: LogArgs,

    /// Fitted `account,alpha,beta` file.
    #[arg(long)]
    pub params: PathBuf,

    /// Interval start (default 0).
    #[arg(long)]
    pub from: Option<f64>,

    /// Interval end (default: the horizon).
    #[arg(long)]
    pub to: Option<f64>,

    /// Quadrature points for the mean activity.
    #[arg(long, default_value_t = cpinfluence::influence::DEFAULT_GRID)]
    pub grid: usize,

    /// `id,label` file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PagerankArgs {
    #[arg(long)]
    pub network: PathBuf,

    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long)]
    pub labels: Option<PathBuf>,

    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,

    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Numeric CSV with a header row.
    #[arg(long)]
    pub table: PathBuf,

    /// Response column.
    #[arg(long)]
    pub response: String,

    /// Comma-separated predictor columns (default: every other column).
    #[arg(long, value_delimiter = ',')]
    pub predictors: Vec<String>,

    /// `raw` or `logit`.
    #[arg(long, default_value = "raw")]
    pub transform: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Scores file written by `influence`.
    #[arg(long)]
    pub scores: PathBuf,

    #[arg(long)]
    pub network: PathBuf,

    /// `label,score` file.
    #[arg(long)]
    pub external: PathBuf,

    /// `label,<controls...>` file.
    #[arg(long)]
    pub controls: Option<PathBuf>,

    /// Response transforms to run.
    #[arg(long, value_delimiter = ',', default_value = "raw,logit")]
    pub transforms: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers.max(1)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_INTERNAL as u8);
        }
    };
    match pool.install(|| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}
