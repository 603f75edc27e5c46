use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use semshift::{change_score, Aggregation, ChangeMeasure, Epoch, ScoreRow};

use crate::commands::{create_output, finish, load_model, read_corpus, read_targets, resolve_keys};
use crate::config::{list_or_default, optional, or_default, required, FileConfig};

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Saved T0 embeddings (word2vec text format).
    #[arg(long, value_name = "FILE")]
    pub t0_model: Option<PathBuf>,
    /// Saved T1 embeddings.
    #[arg(long, value_name = "FILE")]
    pub t1_model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub targets: Option<PathBuf>,
    /// T0 corpus; only needed to infer the POS of bare targets.
    #[arg(long, value_name = "FILE")]
    pub t0: Option<PathBuf>,
    /// T1 corpus; only needed to infer the POS of bare targets.
    #[arg(long, value_name = "FILE")]
    pub t1: Option<PathBuf>,
    /// Neighborhood size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Neighbor aggregation (t0-only, union); repeatable.
    #[arg(long = "aggregation", value_name = "AGG")]
    pub aggregations: Vec<String>,
    /// Change measure (aad, cos-sim, cos-dist); repeatable.
    #[arg(long = "measure", value_name = "MEASURE")]
    pub measures: Vec<String>,
}

pub fn run(args: &ScoreArgs, config: &FileConfig, out_dir: &Path) -> Result<()> {
    let t0_model_path: PathBuf = required(args.t0_model.clone(), config, "t0-model")?;
    let t1_model_path: PathBuf = required(args.t1_model.clone(), config, "t1-model")?;
    let targets_path: PathBuf = required(args.targets.clone(), config, "targets")?;
    let k = or_default(args.k, config, "k", 10)?;
    let aggregations: Vec<Aggregation> = list_or_default(
        &args.aggregations,
        config,
        "aggregation",
        vec![Aggregation::T0Only],
    )?;
    let measures: Vec<ChangeMeasure> = list_or_default(
        &args.measures,
        config,
        "measure",
        ChangeMeasure::ALL.to_vec(),
    )?;

    let targets = read_targets(&targets_path)?;
    let corpora = match (
        optional(args.t0.clone(), config, "t0")?,
        optional(args.t1.clone(), config, "t1")?,
    ) {
        (Some(t0), Some(t1)) => Some((
            read_corpus(&t0, Epoch::T0)?,
            read_corpus(&t1, Epoch::T1)?,
        )),
        _ => None,
    };
    let resolved = resolve_keys(&targets, corpora.as_ref().map(|(a, b)| (a, b)))?;

    let m0 = load_model(&t0_model_path, Epoch::T0)?;
    let m1 = load_model(&t1_model_path, Epoch::T1)?;

    let mut rows = Vec::with_capacity(resolved.len() * measures.len() * aggregations.len());
    for &measure in &measures {
        for &aggregation in &aggregations {
            for (name, key) in &resolved {
                let score = change_score(&m0, &m1, key, k, aggregation, measure)
                    .with_context(|| format!("scoring target {name:?} ({key})"))?;
                rows.push(ScoreRow {
                    target: name.clone(),
                    measure,
                    k,
                    aggregation,
                    score,
                });
            }
        }
    }

    let (path, mut writer) = create_output(out_dir, "scores.tsv")?;
    semshift::write_score_table(&mut writer, &rows)?;
    finish(writer, &path)?;
    println!(
        "score: {} targets x {} measures x {} aggregations at k={} -> {}",
        resolved.len(),
        measures.len(),
        aggregations.len(),
        k,
        path.display()
    );
    Ok(())
}
