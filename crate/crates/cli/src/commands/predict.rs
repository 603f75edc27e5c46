use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use semshift::{
    read_score_table, system1, system2, system3, Aggregation, ChangeMeasure, PredictionSet,
    Scheme, ScoreRow, ScoreTable,
};

use crate::commands::pos_model::{read_pos_distances, PosDistanceRow};
use crate::commands::{create_output, finish};
use crate::config::{optional, or_default, required, FileConfig};

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Voting scheme: system1, system2 or system3.
    #[arg(long, value_name = "SCHEME")]
    pub scheme: Option<String>,
    /// pos_distances.tsv produced by `pos-model` (system1/system3).
    #[arg(long, value_name = "FILE")]
    pub pos_distances: Option<PathBuf>,
    /// scores.tsv produced by `score` (system2/system3).
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,
    /// Neighborhood size the score rows were computed with.
    #[arg(long)]
    pub k: Option<usize>,
    /// Aggregation the score rows were computed with.
    #[arg(long, value_name = "AGG")]
    pub aggregation: Option<String>,
}

fn pos_tables(rows: &[PosDistanceRow]) -> Result<(ScoreTable, ScoreTable, ScoreTable)> {
    let pick = |select: fn(&PosDistanceRow) -> f64| -> Result<ScoreTable> {
        let map: BTreeMap<String, f64> =
            rows.iter().map(|r| (r.target.clone(), select(r))).collect();
        Ok(ScoreTable::new(map, true)?)
    };
    Ok((
        pick(|r| r.euclidean)?,
        pick(|r| r.manhattan)?,
        pick(|r| r.cosine)?,
    ))
}

fn measure_table(
    rows: &[ScoreRow],
    measure: ChangeMeasure,
    k: usize,
    aggregation: Aggregation,
) -> Result<ScoreTable> {
    let map: BTreeMap<String, f64> = rows
        .iter()
        .filter(|r| r.measure == measure && r.k == k && r.aggregation == aggregation)
        .map(|r| (r.target.clone(), r.score))
        .collect();
    if map.is_empty() {
        bail!("no {measure} rows with k={k}, aggregation={aggregation} in the scores file");
    }
    Ok(ScoreTable::new(map, measure.higher_means_change())?)
}

fn run_system1(args: &PredictArgs, config: &FileConfig) -> Result<(PredictionSet, BTreeSet<String>)> {
    let path: PathBuf = required(args.pos_distances.clone(), config, "pos-distances")
        .context("system1 needs --pos-distances")?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let rows = read_pos_distances(BufReader::new(file))?;
    let (euclid, manhattan, cosine) = pos_tables(&rows)?;
    let universe = euclid.targets().map(str::to_string).collect();
    Ok((system1(&euclid, &manhattan, &cosine)?, universe))
}

fn run_system2(args: &PredictArgs, config: &FileConfig) -> Result<(PredictionSet, BTreeSet<String>)> {
    let path: PathBuf =
        required(args.scores.clone(), config, "scores").context("system2 needs --scores")?;
    let k = or_default(args.k, config, "k", 10)?;
    let aggregation: Aggregation = optional(args.aggregation.clone(), config, "aggregation")?
        .map(|s: String| s.parse())
        .transpose()?
        .unwrap_or(Aggregation::T0Only);
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let rows = read_score_table(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))?;
    let aad = measure_table(&rows, ChangeMeasure::AvgAbsDiff, k, aggregation)?;
    let csim = measure_table(&rows, ChangeMeasure::CosineSimilarity, k, aggregation)?;
    let universe = aad.targets().map(str::to_string).collect();
    Ok((system2(&aad, &csim)?, universe))
}

pub fn run(args: &PredictArgs, config: &FileConfig, out_dir: &Path) -> Result<()> {
    let scheme: Scheme = required(args.scheme.clone(), config, "scheme")?
        .parse::<Scheme>()?;

    let (prediction, universe) = match scheme {
        Scheme::System1 => run_system1(args, config)?,
        Scheme::System2 => run_system2(args, config)?,
        Scheme::System3 => {
            let (p1, u1) = run_system1(args, config)?;
            let (p2, u2) = run_system2(args, config)?;
            if u1 != u2 {
                bail!(
                    "pos-distances and scores cover different targets: {:?}",
                    u1.symmetric_difference(&u2).collect::<Vec<_>>()
                );
            }
            (system3(&p1, &p2)?, u1)
        }
    };

    let (path, mut writer) = create_output(out_dir, "predictions.tsv")?;
    semshift::write_predictions(&mut writer, &universe, &prediction)?;
    finish(writer, &path)?;
    println!(
        "{scheme}: {}/{} targets predicted changed -> {}",
        prediction.len(),
        universe.len(),
        path.display()
    );
    Ok(())
}
