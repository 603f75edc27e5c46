use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use semshift::{distance, pos_counts, DistanceKind, Epoch, PosCategory, PosDistribution};

use crate::commands::{create_output, finish, read_corpus, read_targets};
use crate::config::{required, FileConfig};

#[derive(Debug, Args)]
pub struct PosModelArgs {
    #[arg(long, value_name = "FILE")]
    pub t0: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub t1: Option<PathBuf>,
    /// Targets file: one lemma per line, optional tab-separated POS.
    #[arg(long, value_name = "FILE")]
    pub targets: Option<PathBuf>,
}

/// One row of the pos_distances.tsv table.
#[derive(Debug, Clone, PartialEq)]
pub struct PosDistanceRow {
    pub target: String,
    pub euclidean: f64,
    pub manhattan: f64,
    pub cosine: f64,
}

pub fn write_pos_distances<W: Write>(mut writer: W, rows: &[PosDistanceRow]) -> Result<()> {
    for row in rows {
        writeln!(
            writer,
            "{}\t{:.6}\t{:.6}\t{:.6}",
            row.target, row.euclidean, row.manhattan, row.cosine
        )?;
    }
    Ok(())
}

pub fn read_pos_distances<R: BufRead>(reader: R) -> Result<Vec<PosDistanceRow>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            bail!(
                "pos distances line {}: expected 4 tab-separated fields, got {}",
                idx + 1,
                fields.len()
            );
        }
        let number = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .with_context(|| format!("pos distances line {}: invalid number {:?}", idx + 1, fields[i]))
        };
        rows.push(PosDistanceRow {
            target: fields[0].to_string(),
            euclidean: number(1)?,
            manhattan: number(2)?,
            cosine: number(3)?,
        });
    }
    Ok(rows)
}

pub fn run(args: &PosModelArgs, config: &FileConfig, out_dir: &Path) -> Result<()> {
    let t0_path: PathBuf = required(args.t0.clone(), config, "t0")?;
    let t1_path: PathBuf = required(args.t1.clone(), config, "t1")?;
    let targets_path: PathBuf = required(args.targets.clone(), config, "targets")?;

    let t0 = read_corpus(&t0_path, Epoch::T0)?;
    let t1 = read_corpus(&t1_path, Epoch::T1)?;
    let targets = read_targets(&targets_path)?;

    let mut distance_rows = Vec::with_capacity(targets.len());
    let (dist_path, mut dist_writer) = create_output(out_dir, "pos_distances.tsv")?;
    let (usage_path, mut usage_writer) = create_output(out_dir, "pos_distributions.tsv")?;

    for spec in &targets {
        let d0 = PosDistribution::from_counts(&pos_counts(&t0, &spec.lemma)?)?;
        let d1 = PosDistribution::from_counts(&pos_counts(&t1, &spec.lemma)?)?;
        for (epoch, dist) in [(Epoch::T0, &d0), (Epoch::T1, &d1)] {
            let v = dist.values();
            writeln!(
                usage_writer,
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                spec.lemma, epoch, v[0], v[1], v[2], v[3]
            )?;
        }
        distance_rows.push(PosDistanceRow {
            target: spec.lemma.clone(),
            euclidean: distance(&d0, &d1, DistanceKind::Euclidean)?,
            manhattan: distance(&d0, &d1, DistanceKind::Manhattan)?,
            cosine: distance(&d0, &d1, DistanceKind::Cosine)?,
        });
    }
    write_pos_distances(&mut dist_writer, &distance_rows)?;
    finish(dist_writer, &dist_path)?;
    finish(usage_writer, &usage_path)?;
    println!(
        "pos-model: {} targets over categories [{}] -> {}",
        distance_rows.len(),
        PosCategory::ALL.map(PosCategory::tag).join(","),
        dist_path.display()
    );
    Ok(())
}
