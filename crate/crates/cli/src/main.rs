//! `segval`: fit, compare and export startup-valuation models from a JSON run
//! config.

mod commands;
mod config;
mod fitting;
mod predict;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "segval", version, about = "Startup valuation models: OLS, fixed effects, CART, forests, scorecards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Load and transform a data file, then summarise its columns.
    Ingest,
    /// Generate a seeded synthetic deal table and its schema.
    Synth,
    /// Fit every `ols` model of the config.
    FitOls,
    /// Fit every `fixed_effects` model of the config.
    FitFe,
    /// Grow, cross-validate and save every `cart` model of the config.
    FitTree,
    /// Fit every `forest` model of the config.
    FitForest,
    /// Fit every `scorecard` model of the config.
    FitScorecard,
    /// Recompute the CP table of a saved tree on a data set.
    CpTable,
    /// Variable importance of a saved tree.
    Importance,
    /// Score one record with a saved model.
    Predict,
    /// Fit every model of the config and rank them by fit.
    Compare,
    /// Write a saved tree as a Graphviz digraph.
    ExportDot,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON run config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV data file; overrides the config.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// JSON schema file; overrides the config.
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,
    /// Seed for synthesis, cross-validation and forests; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Saved model JSON.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// JSON record to score.
    #[arg(long, global = true)]
    pub record: Option<PathBuf>,
    /// Keep EUR values instead of taking natural logs.
    #[arg(long, global = true)]
    pub no_log: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, &cli.options) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let message = format!("{err:#}").replace('\n', " ");
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
