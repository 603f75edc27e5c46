//! Neighbor-based target representation across epochs and the change
//! measures computed on it.
//!
//! A target is represented inside each epoch by its cosine similarities
//! to a fixed neighbor list drawn from the common vocabulary, which makes
//! the two independently trained spaces comparable without global
//! alignment.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::corpus::{Epoch, TokenKey};
use crate::embed::EmbeddingModel;
use crate::error::{Error, Result};

/// Keys present in both epoch models; the neighbor candidate pool.
#[derive(Debug, Clone)]
pub struct CommonVocabulary {
    keys: BTreeSet<TokenKey>,
}

impl CommonVocabulary {
    pub fn contains(&self, key: &TokenKey) -> bool {
        self.keys.contains(key)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &BTreeSet<TokenKey> {
        &self.keys
    }
}

/// Exact key-set intersection of the two models' vocabularies.
pub fn common_vocabulary(m0: &EmbeddingModel, m1: &EmbeddingModel) -> Result<CommonVocabulary> {
    if m0.is_empty() || m1.is_empty() {
        return Err(Error::InvalidArgument("empty embedding model".into()));
    }
    let keys: BTreeSet<TokenKey> = m0
        .keys()
        .iter()
        .filter(|key| m1.contains(key))
        .cloned()
        .collect();
    if keys.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(CommonVocabulary { keys })
}

/// How the neighbor list is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    /// Top-k neighbors taken from the T0 space only.
    T0Only,
    /// Union of the top-k neighbors from each space.
    Union,
}

impl Aggregation {
    pub const ALL: [Aggregation; 2] = [Aggregation::T0Only, Aggregation::Union];

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::T0Only => "t0-only",
            Aggregation::Union => "union",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t0-only" | "t0_only" | "t0only" => Ok(Aggregation::T0Only),
            "union" => Ok(Aggregation::Union),
            other => Err(Error::InvalidArgument(format!(
                "unknown aggregation {other:?}"
            ))),
        }
    }
}

/// The fixed neighbor list of one target. Ordering is canonical:
/// descending T0 similarity (ties lexicographic) for [`Aggregation::T0Only`],
/// lexicographic over the merged set for [`Aggregation::Union`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSet {
    target: TokenKey,
    k: usize,
    aggregation: Aggregation,
    neighbors: Vec<TokenKey>,
}

impl NeighborSet {
    pub fn target(&self) -> &TokenKey {
        &self.target
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    pub fn neighbors(&self) -> &[TokenKey] {
        &self.neighbors
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Builds the neighbor list of `target`, restricted to the common
/// vocabulary of the two models.
pub fn neighbor_set(
    m0: &EmbeddingModel,
    m1: &EmbeddingModel,
    target: &TokenKey,
    k: usize,
    aggregation: Aggregation,
) -> Result<NeighborSet> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    for model in [m0, m1] {
        if !model.contains(target) {
            return Err(Error::OutOfVocabulary {
                key: target.to_string(),
                epoch: model.epoch(),
            });
        }
    }
    let pool = common_vocabulary(m0, m1)?;

    let neighbors = match aggregation {
        Aggregation::T0Only => m0
            .nearest_neighbors(target, k, Some(pool.keys()))?
            .into_iter()
            .map(|(key, _)| key)
            .collect(),
        Aggregation::Union => {
            let mut merged: BTreeSet<TokenKey> = BTreeSet::new();
            for model in [m0, m1] {
                for (key, _) in model.nearest_neighbors(target, k, Some(pool.keys()))? {
                    merged.insert(key);
                }
            }
            merged.into_iter().collect()
        }
    };
    Ok(NeighborSet {
        target: target.clone(),
        k,
        aggregation,
        neighbors,
    })
}

/// The similarities of the target to its neighbor list inside one
/// epoch's space, in neighbor-list order.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderVector {
    epoch: Epoch,
    values: Vec<f64>,
}

impl SecondOrderVector {
    /// Builds a vector from explicit components, each a cosine in
    /// [-1, 1] (up to rounding).
    pub fn new(epoch: Epoch, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-9) {
            return Err(Error::InvalidArgument(
                "second-order components must be cosines in [-1, 1]".into(),
            ));
        }
        Ok(SecondOrderVector { epoch, values })
    }

    pub fn epoch(&self) -> Epoch {
        self.epoch
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Computes the second-order vector of the neighbor set in `model`.
/// Both epochs must be evaluated against the identical neighbor order,
/// which the shared [`NeighborSet`] guarantees.
pub fn second_order_vector(
    model: &EmbeddingModel,
    target: &TokenKey,
    neighbors: &NeighborSet,
) -> Result<SecondOrderVector> {
    let values = neighbors
        .neighbors()
        .iter()
        .map(|neighbor| model.cosine_similarity(target, neighbor))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SecondOrderVector {
        epoch: model.epoch(),
        values,
    })
}

/// Mean of component-wise absolute differences; higher means more
/// change. Bounded by 2 when components lie in [-1, 1].
pub fn avg_abs_diff(v0: &SecondOrderVector, v1: &SecondOrderVector) -> Result<f64> {
    check_lengths(v0, v1)?;
    let sum: f64 = v0
        .values
        .iter()
        .zip(&v1.values)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / v0.len() as f64)
}

/// Cosine of the two second-order vectors; lower means more change.
pub fn cos_sim_measure(v0: &SecondOrderVector, v1: &SecondOrderVector) -> Result<f64> {
    check_lengths(v0, v1)?;
    let dot: f64 = v0.values.iter().zip(&v1.values).map(|(a, b)| a * b).sum();
    let n0: f64 = v0.values.iter().map(|a| a * a).sum::<f64>().sqrt();
    let n1: f64 = v1.values.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n0 == 0.0 || n1 == 0.0 {
        return Err(Error::ZeroNorm(
            "degenerate second-order representation".into(),
        ));
    }
    Ok(dot / (n0 * n1))
}

/// Exactly `1 - cos_sim_measure`; higher means more change.
pub fn cos_dist_measure(v0: &SecondOrderVector, v1: &SecondOrderVector) -> Result<f64> {
    Ok(1.0 - cos_sim_measure(v0, v1)?)
}

fn check_lengths(v0: &SecondOrderVector, v1: &SecondOrderVector) -> Result<()> {
    if v0.len() != v1.len() {
        return Err(Error::LengthMismatch {
            left: v0.len(),
            right: v1.len(),
        });
    }
    if v0.is_empty() {
        return Err(Error::InvalidArgument(
            "empty second-order vectors".into(),
        ));
    }
    Ok(())
}

/// The three change estimators over second-order vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangeMeasure {
    AvgAbsDiff,
    CosineSimilarity,
    CosineDistance,
}

impl ChangeMeasure {
    pub const ALL: [ChangeMeasure; 3] = [
        ChangeMeasure::AvgAbsDiff,
        ChangeMeasure::CosineSimilarity,
        ChangeMeasure::CosineDistance,
    ];

    /// Whether a larger value of this measure means more change.
    pub fn higher_means_change(self) -> bool {
        match self {
            ChangeMeasure::AvgAbsDiff | ChangeMeasure::CosineDistance => true,
            ChangeMeasure::CosineSimilarity => false,
        }
    }

    pub fn apply(self, v0: &SecondOrderVector, v1: &SecondOrderVector) -> Result<f64> {
        match self {
            ChangeMeasure::AvgAbsDiff => avg_abs_diff(v0, v1),
            ChangeMeasure::CosineSimilarity => cos_sim_measure(v0, v1),
            ChangeMeasure::CosineDistance => cos_dist_measure(v0, v1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeMeasure::AvgAbsDiff => "aad",
            ChangeMeasure::CosineSimilarity => "cos-sim",
            ChangeMeasure::CosineDistance => "cos-dist",
        }
    }
}

impl fmt::Display for ChangeMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChangeMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aad" | "avg-abs-diff" | "avg_abs_diff" => Ok(ChangeMeasure::AvgAbsDiff),
            "cos-sim" | "cosine-similarity" | "cosine_similarity" => {
                Ok(ChangeMeasure::CosineSimilarity)
            }
            "cos-dist" | "cosine-distance" | "cosine_distance" => {
                Ok(ChangeMeasure::CosineDistance)
            }
            other => Err(Error::InvalidArgument(format!("unknown measure {other:?}"))),
        }
    }
}

/// Neighbor set, both second-order vectors, then the measure. `k`
/// defaults to 10 in the submitted setting; callers pass it explicitly.
pub fn change_score(
    m0: &EmbeddingModel,
    m1: &EmbeddingModel,
    target: &TokenKey,
    k: usize,
    aggregation: Aggregation,
    measure: ChangeMeasure,
) -> Result<f64> {
    let neighbors = neighbor_set(m0, m1, target, k, aggregation)?;
    let v0 = second_order_vector(m0, target, &neighbors)?;
    let v1 = second_order_vector(m1, target, &neighbors)?;
    measure.apply(&v0, &v1)
}

/// One row of a change-score table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub target: String,
    pub measure: ChangeMeasure,
    pub k: usize,
    pub aggregation: Aggregation,
    pub score: f64,
}

/// Writes rows as `target<TAB>measure<TAB>k<TAB>aggregation<TAB>score`,
/// scores rendered with 6 decimals.
pub fn write_score_table<W: Write>(mut writer: W, rows: &[ScoreRow]) -> Result<()> {
    for row in rows {
        writeln!(
            writer,
            "{}\t{}\t{}\t{}\t{:.6}",
            row.target, row.measure, row.k, row.aggregation, row.score
        )?;
    }
    Ok(())
}

/// Reads the format written by [`write_score_table`].
pub fn read_score_table<R: BufRead>(reader: R) -> Result<Vec<ScoreRow>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected 5 tab-separated fields, got {}", fields.len()),
            });
        }
        let parse_err = |msg: String| Error::Parse {
            line: idx + 1,
            msg,
        };
        rows.push(ScoreRow {
            target: fields[0].to_string(),
            measure: fields[1]
                .parse()
                .map_err(|e: Error| parse_err(e.to_string()))?,
            k: fields[2]
                .parse()
                .map_err(|_| parse_err(format!("invalid k {:?}", fields[2])))?,
            aggregation: fields[3]
                .parse()
                .map_err(|e: Error| parse_err(e.to_string()))?,
            score: fields[4]
                .parse()
                .map_err(|_| parse_err(format!("invalid score {:?}", fields[4])))?,
        });
    }
    Ok(rows)
}
