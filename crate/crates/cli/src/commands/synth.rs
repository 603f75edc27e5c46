use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use semshift::{generate_synthetic, PosCategory, PosShift, SynthConfig};

use crate::commands::{create_output, finish};
use crate::config::{optional, or_default, FileConfig};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_changed: Option<usize>,
    #[arg(long)]
    pub n_stable: Option<usize>,
    /// Sentences generated per epoch.
    #[arg(long)]
    pub sentences: Option<usize>,
    /// Words per topic vocabulary.
    #[arg(long)]
    pub topic_vocab: Option<usize>,
    /// Fraction of a changed target's T1 contexts drawn from topic B.
    #[arg(long)]
    pub shift_strength: Option<f64>,
    /// Retag changed targets in T1: FROM:TO:FRACTION (e.g. PROPN:NOUN:0.5).
    #[arg(long, value_name = "FROM:TO:FRAC")]
    pub pos_shift: Option<String>,
}

fn parse_pos_shift(raw: &str) -> Result<PosShift> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        bail!("--pos-shift must be FROM:TO:FRACTION, got {raw:?}");
    }
    Ok(PosShift {
        from: parts[0].parse::<PosCategory>()?,
        to: parts[1].parse::<PosCategory>()?,
        fraction: parts[2]
            .parse()
            .with_context(|| format!("invalid fraction {:?}", parts[2]))?,
    })
}

pub fn run(args: &SynthArgs, config: &FileConfig, out_dir: &Path) -> Result<()> {
    let defaults = SynthConfig::default();
    let synth = SynthConfig {
        n_changed: or_default(args.n_changed, config, "n-changed", defaults.n_changed)?,
        n_stable: or_default(args.n_stable, config, "n-stable", defaults.n_stable)?,
        sentences_per_epoch: or_default(
            args.sentences,
            config,
            "sentences",
            defaults.sentences_per_epoch,
        )?,
        topic_vocab_size: or_default(
            args.topic_vocab,
            config,
            "topic-vocab",
            defaults.topic_vocab_size,
        )?,
        shift_strength: or_default(
            args.shift_strength,
            config,
            "shift-strength",
            defaults.shift_strength,
        )?,
        pos_shift: optional(args.pos_shift.clone(), config, "pos-shift")?
            .map(|raw: String| parse_pos_shift(&raw))
            .transpose()?,
        seed: or_default(args.seed, config, "seed", defaults.seed)?,
    };

    let (t0, t1, gold) = generate_synthetic(&synth)?;

    let (t0_path, mut writer) = create_output(out_dir, "t0.tsv")?;
    t0.write_to(&mut writer)?;
    finish(writer, &t0_path)?;

    let (t1_path, mut writer) = create_output(out_dir, "t1.tsv")?;
    t1.write_to(&mut writer)?;
    finish(writer, &t1_path)?;

    let (gold_path, mut writer) = create_output(out_dir, "gold.tsv")?;
    gold.write_to(&mut writer)?;
    finish(writer, &gold_path)?;

    // Targets file with the base POS so downstream stages need no
    // corpus-based inference.
    let base_pos = synth.pos_shift.map(|s| s.from).unwrap_or(PosCategory::Noun);
    let (targets_path, mut writer) = create_output(out_dir, "targets.tsv")?;
    for (target, _) in gold.iter() {
        writeln!(writer, "{target}\t{}", base_pos.tag())?;
    }
    finish(writer, &targets_path)?;

    println!(
        "synth: {} changed + {} stable targets, {} sentences/epoch (seed {}) -> {}, {}, {}, {}",
        synth.n_changed,
        synth.n_stable,
        synth.sentences_per_epoch,
        synth.seed,
        t0_path.display(),
        t1_path.display(),
        gold_path.display(),
        targets_path.display()
    );
    Ok(())
}
