use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use semshift::{train_cbow, Epoch, TrainingConfig};

use crate::commands::{create_output, finish, read_corpus};
use crate::config::{or_default, required, FileConfig};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// T0 corpus file (form<TAB>pos<TAB>lemma).
    #[arg(long, value_name = "FILE")]
    pub t0: Option<PathBuf>,
    /// T1 corpus file.
    #[arg(long, value_name = "FILE")]
    pub t1: Option<PathBuf>,
    /// Vector size.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Maximum context offset.
    #[arg(long)]
    pub window: Option<usize>,
    /// Drop keys occurring fewer times than this.
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Negative samples per prediction.
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Training passes over the corpus.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub initial_lr: Option<f64>,
    #[arg(long)]
    pub final_lr: Option<f64>,
    /// Frequent-key subsampling threshold (0 disables).
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Single-threaded, bit-reproducible training.
    #[arg(long, action = clap::ArgAction::SetTrue)]
    pub deterministic: Option<bool>,
}

pub fn training_config(args: &TrainArgs, config: &FileConfig) -> Result<TrainingConfig> {
    let defaults = TrainingConfig::default();
    Ok(TrainingConfig {
        dim: or_default(args.dim, config, "dim", defaults.dim)?,
        window: or_default(args.window, config, "window", defaults.window)?,
        min_count: or_default(args.min_count, config, "min-count", defaults.min_count)?,
        negatives: or_default(args.negatives, config, "negatives", defaults.negatives)?,
        epochs: or_default(args.epochs, config, "epochs", defaults.epochs)?,
        initial_lr: or_default(args.initial_lr, config, "initial-lr", defaults.initial_lr)?,
        final_lr: or_default(args.final_lr, config, "final-lr", defaults.final_lr)?,
        subsample_threshold: or_default(
            args.subsample,
            config,
            "subsample",
            defaults.subsample_threshold,
        )?,
        seed: or_default(args.seed, config, "seed", defaults.seed)?,
        deterministic: or_default(args.deterministic, config, "deterministic", false)?,
    })
}

pub fn run(args: &TrainArgs, config: &FileConfig, out_dir: &Path) -> Result<()> {
    let t0_path: PathBuf = required(args.t0.clone(), config, "t0")?;
    let t1_path: PathBuf = required(args.t1.clone(), config, "t1")?;
    let training = training_config(args, config)?;

    let mut summary = Vec::new();
    for (path, epoch, name) in [(t0_path, Epoch::T0, "t0.vec"), (t1_path, Epoch::T1, "t1.vec")] {
        let corpus = read_corpus(&path, epoch)?;
        let model =
            train_cbow(&corpus, &training).with_context(|| format!("training {epoch}"))?;
        let (out_path, mut writer) = create_output(out_dir, name)?;
        model
            .write_word2vec(&mut writer)
            .with_context(|| format!("writing {}", out_path.display()))?;
        finish(writer, &out_path)?;
        summary.push(format!("{epoch}: {} keys -> {}", model.len(), out_path.display()));
    }
    println!("trained dim={} [{}]", training.dim, summary.join("; "));
    Ok(())
}
