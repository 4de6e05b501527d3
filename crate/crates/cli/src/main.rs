//! Batch front end: simulate / fit / score / summarize.
//!
//! Exit codes: 0 success, 2 validation failure, 3 runtime abort.

mod config;
mod fit;
mod score;
mod simulate;
mod summarize;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "three-groups", version, about = "Three-groups hierarchical Bayesian models for joint GWAS and RNA-seq gene classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate simulated GWAS + RNA-seq replicate archives with shared truth labels.
    Simulate(SimulateArgs),
    /// Fit a three-groups model by reversible-jump MCMC and write trace, summary, and diagnostics.
    Fit(FitArgs),
    /// Score posterior summaries against ground truth (log score, Brier, AUC, TPR at mean FPR).
    Score(ScoreArgs),
    /// Turn a trace into report tables: per-gene summary, volcano data, log-prior curve.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Run configuration file (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replicates override.
    #[arg(long)]
    reps: Option<u64>,
    /// Output archive directory.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replicate directory in the simulate-archive layout (shorthand for the
    /// per-file [data] paths in the config).
    #[arg(long)]
    replicate: Option<PathBuf>,
    /// Which sub-models to fit.
    #[arg(long, value_parser = ["rna", "gwas", "joint"])]
    modality: Option<String>,
    /// Effect-prior family.
    #[arg(long, value_parser = ["local-fixed", "local-hyper", "nonlocal-fixed", "nonlocal-pimom", "nonlocal-invgamma"])]
    family: Option<String>,
    /// Total MCMC iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Burn-in iterations discarded by the summary.
    #[arg(long)]
    burnin: Option<usize>,
    /// Number of chains.
    #[arg(long)]
    chains: Option<u64>,
    /// Worker threads for running chains in parallel.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
    /// Abort before sampling if the estimated memory footprint (GB) exceeds
    /// this bound; the estimate is always printed.
    #[arg(long)]
    max_ram_estimate: Option<f64>,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulate-archive directory holding rep_*/truth.tsv.
    #[arg(long)]
    archive: PathBuf,
    /// Directory of fits laid out as <model>/<replicate>/summary.tsv.
    #[arg(long)]
    fits: PathBuf,
    /// Comma-separated mean-FPR targets, e.g. 0.01,0.05.
    #[arg(long)]
    targets: Option<String>,
    /// Output metrics table (tidy: model, replicate, metric, value).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
pub struct SummarizeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trace file(s); several chains of one fit may be given together.
    #[arg(long, required = true)]
    trace: Vec<PathBuf>,
    /// Burn-in override (defaults to the value in the trace header).
    #[arg(long)]
    burnin: Option<usize>,
    /// Gene count for the log-prior penalty curve table.
    #[arg(long, default_value_t = 1000)]
    prior_curve_j: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

/// Input or configuration problem: exit code 2.
#[derive(Debug)]
pub struct ValidationFailure(pub String);

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ValidationFailure {}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ValidationFailure>().is_some() {
        return 2;
    }
    if err.downcast_ref::<toml::de::Error>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<three_groups::Error>() {
        return match e {
            three_groups::Error::Io { .. } | three_groups::Error::NonFiniteInit(_) => 3,
            _ => 2,
        };
    }
    3
}

/// Ensure an output directory is usable: create it, or require --force when
/// it already has contents (which are then removed).
pub fn prepare_out_dir(path: &Path, force: bool) -> anyhow::Result<()> {
    if path.exists() {
        let occupied = std::fs::read_dir(path)?.next().is_some();
        if occupied {
            if !force {
                anyhow::bail!(ValidationFailure(format!(
                    "output directory {} is not empty (pass --force to overwrite)",
                    path.display()
                )));
            }
            std::fs::remove_dir_all(path)?;
        }
    }
    std::fs::create_dir_all(path)?;
    Ok(())
}

pub fn prepare_out_file(path: &Path, force: bool) -> anyhow::Result<()> {
    if path.exists() && !force {
        anyhow::bail!(ValidationFailure(format!(
            "output file {} already exists (pass --force to overwrite)",
            path.display()
        )));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Fit(args) => fit::run(args),
        Command::Score(args) => score::run(args),
        Command::Summarize(args) => summarize::run(args),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}
