//! Threshold and voting schemes that turn score tables into binary
//! change predictions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Per-target scores of one measure plus the direction that means "more
/// changed".
#[derive(Debug, Clone)]
pub struct ScoreTable {
    rows: BTreeMap<String, f64>,
    higher_means_change: bool,
}

impl ScoreTable {
    pub fn new(rows: BTreeMap<String, f64>, higher_means_change: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("empty score table".into()));
        }
        if let Some((target, score)) = rows.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite score {score} for target {target:?}"
            )));
        }
        Ok(ScoreTable {
            rows,
            higher_means_change,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn higher_means_change(&self) -> bool {
        self.higher_means_change
    }

    pub fn get(&self, target: &str) -> Option<f64> {
        self.rows.get(target).copied()
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.rows.iter().map(|(t, &s)| (t.as_str(), s))
    }
}

/// 1-based ranks, 1 = most changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    rows: BTreeMap<String, usize>,
}

impl RankTable {
    pub fn get(&self, target: &str) -> Option<usize> {
        self.rows.get(target).copied()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.rows.iter().map(|(t, &r)| (t.as_str(), r))
    }
}

/// Sorts targets most-changed-first according to the table's direction,
/// ties broken lexicographically, and assigns 1-based positions.
pub fn rank(table: &ScoreTable) -> Result<RankTable> {
    let mut ordered: Vec<(&str, f64)> = table.iter().collect();
    ordered.sort_by(|(ta, sa), (tb, sb)| {
        let by_score = if table.higher_means_change() {
            sb.partial_cmp(sa)
        } else {
            sa.partial_cmp(sb)
        };
        by_score.expect("scores validated finite").then_with(|| ta.cmp(tb))
    });
    let rows = ordered
        .into_iter()
        .enumerate()
        .map(|(i, (target, _))| (target.to_string(), i + 1))
        .collect();
    Ok(RankTable { rows })
}

/// The three voting schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    System1,
    System2,
    System3,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::System1 => "system1",
            Scheme::System2 => "system2",
            Scheme::System3 => "system3",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "system1" => Ok(Scheme::System1),
            "system2" => Ok(Scheme::System2),
            "system3" => Ok(Scheme::System3),
            other => Err(Error::InvalidArgument(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Targets predicted as changed by one scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    scheme: Scheme,
    changed: BTreeSet<String>,
}

impl PredictionSet {
    pub fn new(scheme: Scheme, changed: BTreeSet<String>) -> Self {
        PredictionSet { scheme, changed }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn changed(&self) -> &BTreeSet<String> {
        &self.changed
    }

    pub fn is_changed(&self, target: &str) -> bool {
        self.changed.contains(target)
    }

    pub fn len(&self) -> usize {
        self.changed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changed.is_empty()
    }
}

fn check_same_targets(tables: &[&ScoreTable]) -> Result<()> {
    let (first, rest) = tables.split_first().expect("at least one table");
    let reference: BTreeSet<&str> = first.targets().collect();
    for table in rest {
        let other: BTreeSet<&str> = table.targets().collect();
        if other != reference {
            let missing = reference
                .difference(&other)
                .map(|t| t.to_string())
                .collect();
            let extra = other
                .difference(&reference)
                .map(|t| t.to_string())
                .collect();
            return Err(Error::TargetSetMismatch { missing, extra });
        }
    }
    Ok(())
}

fn check_direction(table: &ScoreTable, expected: bool, what: &str) -> Result<()> {
    if table.higher_means_change() != expected {
        return Err(Error::InvalidArgument(format!(
            "{what} table must have higher_means_change = {expected}"
        )));
    }
    Ok(())
}

/// Upper third of summed distance ranks. Each table is ranked with
/// higher distance meaning more change, the three ranks are summed, and
/// the first `ceil(n/3)` targets of the resulting most-changed-first
/// order are predicted as changed.
pub fn system1(
    euclidean: &ScoreTable,
    manhattan: &ScoreTable,
    cosine: &ScoreTable,
) -> Result<PredictionSet> {
    let tables = [euclidean, manhattan, cosine];
    check_same_targets(&tables)?;
    for (table, name) in tables.iter().zip(["euclidean", "manhattan", "cosine"]) {
        check_direction(table, true, name)?;
    }

    let mut sums: BTreeMap<String, usize> = BTreeMap::new();
    for table in tables {
        for (target, r) in rank(table)?.iter() {
            *sums.entry(target.to_string()).or_insert(0) += r;
        }
    }
    let mut ordered: Vec<(String, usize)> = sums.into_iter().collect();
    ordered.sort_by(|(ta, sa), (tb, sb)| sa.cmp(sb).then_with(|| ta.cmp(tb)));

    let cut = euclidean.len().div_ceil(3);
    let changed = ordered
        .into_iter()
        .take(cut)
        .map(|(target, _)| target)
        .collect();
    Ok(PredictionSet::new(Scheme::System1, changed))
}

/// Intersection of the top halves: the `ceil(n/2)` most-changed targets
/// of the average-absolute-difference ranking intersected with the
/// `ceil(n/2)` most-changed targets of the cosine-similarity ranking.
pub fn system2(aad: &ScoreTable, cosine_sim: &ScoreTable) -> Result<PredictionSet> {
    check_same_targets(&[aad, cosine_sim])?;
    check_direction(aad, true, "avg-abs-diff")?;
    check_direction(cosine_sim, false, "cosine-similarity")?;

    let half = aad.len().div_ceil(2);
    let top = |table: &ScoreTable| -> Result<BTreeSet<String>> {
        Ok(rank(table)?
            .iter()
            .filter(|(_, r)| *r <= half)
            .map(|(t, _)| t.to_string())
            .collect())
    };
    let changed = top(aad)?
        .intersection(&top(cosine_sim)?)
        .cloned()
        .collect();
    Ok(PredictionSet::new(Scheme::System2, changed))
}

/// Union of the System1 and System2 predictions.
pub fn system3(p1: &PredictionSet, p2: &PredictionSet) -> Result<PredictionSet> {
    let changed = p1.changed().union(p2.changed()).cloned().collect();
    Ok(PredictionSet::new(Scheme::System3, changed))
}

/// Writes the shared-task answer format `target<TAB>0|1`, one row per
/// target in lexicographic order.
pub fn write_predictions<W: Write>(
    mut writer: W,
    universe: &BTreeSet<String>,
    predictions: &PredictionSet,
) -> Result<()> {
    for target in universe {
        let label = u8::from(predictions.is_changed(target));
        writeln!(writer, "{target}\t{label}")?;
    }
    Ok(())
}

/// Reads the answer format back as (universe, changed set).
pub fn read_predictions<R: BufRead>(reader: R) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    let mut universe = BTreeSet::new();
    let mut changed = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (target, label) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: "expected target<TAB>0|1".into(),
        })?;
        if !universe.insert(target.to_string()) {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("duplicate target {target:?}"),
            });
        }
        match label {
            "0" => {}
            "1" => {
                changed.insert(target.to_string());
            }
            other => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("invalid label {other:?}"),
                })
            }
        }
    }
    Ok((universe, changed))
}
