//! Command-line frontend wiring the change-detection pipeline end to
//! end. Each stage reads and writes plain files so intermediate
//! artifacts stay inspectable and reruns can start anywhere.

mod commands;
mod config;

use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use crate::commands::{evaluate, pos_model, predict, score, sweep, synth, train};
use crate::config::FileConfig;

#[derive(Parser)]
#[command(
    name = "semshift",
    version,
    about = "Detect lexical semantic change between two time-sliced corpora"
)]
struct Cli {
    /// Config file with `key = value` lines standing in for flags;
    /// flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for produced files.
    #[arg(long, global = true, env = "SEMSHIFT_OUT", value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the two epoch embedding models and save them.
    Train(train::TrainArgs),
    /// Compute per-target POS distributions and their distances.
    PosModel(pos_model::PosModelArgs),
    /// Compute change scores from saved embedding models.
    Score(score::ScoreArgs),
    /// Turn score tables into changed/stable predictions.
    Predict(predict::PredictArgs),
    /// Score a predictions file against gold labels.
    Evaluate(evaluate::EvaluateArgs),
    /// Sweep k for every measure and aggregation against gold labels.
    Sweep(sweep::SweepArgs),
    /// Generate a synthetic two-epoch corpus with controlled shifts.
    Synth(synth::SynthArgs),
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let out_dir = match &cli.out {
        Some(dir) => dir.clone(),
        None => config
            .parse::<PathBuf>("out")?
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    match &cli.command {
        Command::Train(args) => train::run(args, &config, &out_dir),
        Command::PosModel(args) => pos_model::run(args, &config, &out_dir),
        Command::Score(args) => score::run(args, &config, &out_dir),
        Command::Predict(args) => predict::run(args, &config, &out_dir),
        Command::Evaluate(args) => evaluate::run(args, &config, &out_dir),
        Command::Sweep(args) => sweep::run(args, &config, &out_dir),
        Command::Synth(args) => synth::run(args, &config, &out_dir),
    }
}

fn main() {
    // Unknown flags and subcommands exit 2 via clap; pipeline failures
    // exit 1 with the originating error chain.
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err:#}");
        process::exit(1);
    }
}
