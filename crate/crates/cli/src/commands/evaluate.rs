use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use semshift::{read_predictions, GoldLabels, PredictionSet, Scheme};

use crate::config::{required, FileConfig};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// predictions.tsv produced by `predict`.
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
    /// Gold labels file (target<TAB>0|1).
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
}

fn list(targets: &[String]) -> String {
    if targets.is_empty() {
        "-".to_string()
    } else {
        targets.join(",")
    }
}

pub fn run(args: &EvaluateArgs, config: &FileConfig, _out_dir: &Path) -> Result<()> {
    let predictions_path: PathBuf = required(args.predictions.clone(), config, "predictions")?;
    let gold_path: PathBuf = required(args.gold.clone(), config, "gold")?;

    let file = File::open(&predictions_path)
        .with_context(|| format!("opening predictions file {}", predictions_path.display()))?;
    let (universe, changed) = read_predictions(BufReader::new(file))
        .with_context(|| format!("parsing {}", predictions_path.display()))?;

    let file = File::open(&gold_path)
        .with_context(|| format!("opening gold file {}", gold_path.display()))?;
    let gold = GoldLabels::from_reader(BufReader::new(file))
        .with_context(|| format!("parsing {}", gold_path.display()))?;

    let gold_targets: BTreeSet<String> = gold.iter().map(|(t, _)| t.to_string()).collect();
    if gold_targets != universe {
        bail!(
            "predictions and gold cover different targets: {:?}",
            gold_targets.symmetric_difference(&universe).collect::<Vec<_>>()
        );
    }

    let prediction = PredictionSet::new(Scheme::System1, changed);
    let report = semshift::evaluate(&prediction, &gold)?;
    println!(
        "accuracy {:.4} ({}/{} correct) | false positives: {} | false negatives: {}",
        report.accuracy,
        report.n - report.false_positives.len() - report.false_negatives.len(),
        report.n,
        list(&report.false_positives),
        list(&report.false_negatives)
    );
    Ok(())
}
