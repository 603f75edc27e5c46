use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use semshift::{sweep_k, write_sweep_csv, Aggregation, ChangeMeasure, Epoch, GoldLabels};

use crate::commands::{create_output, finish, load_model, read_corpus, read_targets, resolve_keys};
use crate::config::{list_or_default, optional, or_default, required, FileConfig};

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_name = "FILE")]
    pub t0_model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub t1_model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub targets: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
    /// T0 corpus; only needed to infer the POS of bare targets.
    #[arg(long, value_name = "FILE")]
    pub t0: Option<PathBuf>,
    /// T1 corpus; only needed to infer the POS of bare targets.
    #[arg(long, value_name = "FILE")]
    pub t1: Option<PathBuf>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Neighbor aggregation (t0-only, union); repeatable.
    #[arg(long = "aggregation", value_name = "AGG")]
    pub aggregations: Vec<String>,
    /// Change measure (aad, cos-sim, cos-dist); repeatable.
    #[arg(long = "measure", value_name = "MEASURE")]
    pub measures: Vec<String>,
}

pub fn run(args: &SweepArgs, config: &FileConfig, out_dir: &Path) -> Result<()> {
    let t0_model_path: PathBuf = required(args.t0_model.clone(), config, "t0-model")?;
    let t1_model_path: PathBuf = required(args.t1_model.clone(), config, "t1-model")?;
    let targets_path: PathBuf = required(args.targets.clone(), config, "targets")?;
    let gold_path: PathBuf = required(args.gold.clone(), config, "gold")?;
    let k_min = or_default(args.k_min, config, "k-min", 1)?;
    let k_max = or_default(args.k_max, config, "k-max", 50)?;
    if k_min < 1 || k_min > k_max {
        bail!("invalid k range {k_min}..{k_max}");
    }
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

    let gold_file = File::open(&gold_path)
        .with_context(|| format!("opening gold file {}", gold_path.display()))?;
    let gold = GoldLabels::from_reader(BufReader::new(gold_file))
        .with_context(|| format!("parsing {}", gold_path.display()))?;

    let m0 = load_model(&t0_model_path, Epoch::T0)?;
    let m1 = load_model(&t1_model_path, Epoch::T1)?;

    let k_values: Vec<usize> = (k_min..=k_max).collect();
    let records = sweep_k(&m0, &m1, &resolved, &gold, &k_values, &measures, &aggregations)?;

    let (path, mut writer) = create_output(out_dir, "sweep.csv")?;
    write_sweep_csv(&mut writer, &records)?;
    finish(writer, &path)?;
    println!(
        "sweep: {} records (k={k_min}..{k_max}, {} measures, {} aggregations) -> {}",
        records.len(),
        measures.len(),
        aggregations.len(),
        path.display()
    );
    Ok(())
}
