//! Scoring against gold labels, discrimination ranges, best-threshold
//! search and the k-sweep analysis.

mod synth;

pub use synth::{generate_synthetic, PosShift, SynthConfig};

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::corpus::TokenKey;
use crate::decide::{PredictionSet, ScoreTable};
use crate::embed::EmbeddingModel;
use crate::error::{Error, Result};
use crate::secondorder::{change_score, Aggregation, ChangeMeasure};

/// Ground-truth changed/stable annotations. `true` means changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldLabels {
    labels: BTreeMap<String, bool>,
}

impl GoldLabels {
    pub fn new(labels: BTreeMap<String, bool>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("empty gold labels".into()));
        }
        Ok(GoldLabels { labels })
    }

    /// Reads the gold file format `target<TAB>0|1`.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut labels = BTreeMap::new();
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
            let changed = match label {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("invalid label {other:?}"),
                    })
                }
            };
            if labels.insert(target.to_string(), changed).is_some() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("duplicate target {target:?}"),
                });
            }
        }
        GoldLabels::new(labels)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for (target, &changed) in &self.labels {
            writeln!(writer, "{target}\t{}", u8::from(changed))?;
        }
        Ok(())
    }

    pub fn get(&self, target: &str) -> Option<bool> {
        self.labels.get(target).copied()
    }

    pub fn contains(&self, target: &str) -> bool {
        self.labels.contains_key(target)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.labels.iter().map(|(t, &c)| (t.as_str(), c))
    }

    pub fn changed_targets(&self) -> impl Iterator<Item = &str> {
        self.iter().filter(|(_, c)| *c).map(|(t, _)| t)
    }
}

/// Accuracy plus the error sets of one prediction run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub false_positives: Vec<String>,
    pub false_negatives: Vec<String>,
    pub n: usize,
}

/// Scores a prediction set against the gold labels. The evaluated
/// universe is the gold coverage; every predicted-changed target must be
/// covered.
pub fn evaluate(predictions: &PredictionSet, gold: &GoldLabels) -> Result<EvaluationReport> {
    for target in predictions.changed() {
        if !gold.contains(target) {
            return Err(Error::MissingGoldLabel(target.clone()));
        }
    }
    let mut false_positives = Vec::new();
    let mut false_negatives = Vec::new();
    for (target, is_changed) in gold.iter() {
        match (predictions.is_changed(target), is_changed) {
            (true, false) => false_positives.push(target.to_string()),
            (false, true) => false_negatives.push(target.to_string()),
            _ => {}
        }
    }
    let n = gold.len();
    let accuracy = (n - false_positives.len() - false_negatives.len()) as f64 / n as f64;
    Ok(EvaluationReport {
        accuracy,
        false_positives,
        false_negatives,
        n,
    })
}

/// Per-class score intervals and their intersection, when any.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRanges {
    pub changed: (f64, f64),
    pub stable: (f64, f64),
    pub overlap: Option<(f64, f64)>,
}

fn split_by_class(scores: &ScoreTable, gold: &GoldLabels) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut changed = Vec::new();
    let mut stable = Vec::new();
    for (target, score) in scores.iter() {
        match gold.get(target) {
            Some(true) => changed.push(score),
            Some(false) => stable.push(score),
            None => return Err(Error::MissingGoldLabel(target.to_string())),
        }
    }
    if changed.is_empty() {
        return Err(Error::EmptyClass("changed"));
    }
    if stable.is_empty() {
        return Err(Error::EmptyClass("stable"));
    }
    Ok((changed, stable))
}

/// [min, max] of the scores of each gold class; the overlap is the
/// intersection of the two closed intervals.
pub fn class_ranges(scores: &ScoreTable, gold: &GoldLabels) -> Result<ClassRanges> {
    let (changed, stable) = split_by_class(scores, gold)?;
    let range = |values: &[f64]| {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    };
    let changed = range(&changed);
    let stable = range(&stable);
    let lo = changed.0.max(stable.0);
    let hi = changed.1.min(stable.1);
    let overlap = (lo <= hi).then_some((lo, hi));
    Ok(ClassRanges {
        changed,
        stable,
        overlap,
    })
}

/// Finds the threshold maximizing accuracy. Candidates are the midpoints
/// of consecutive distinct sorted scores plus a below-minimum and an
/// above-maximum sentinel; a target is classified changed when its score
/// lies on the measure's more-changed side of the threshold. Ties go to
/// the smallest candidate.
pub fn best_threshold(scores: &ScoreTable, gold: &GoldLabels) -> Result<(f64, f64)> {
    let (changed, stable) = split_by_class(scores, gold)?;

    let mut distinct: Vec<f64> = scores.iter().map(|(_, s)| s).collect();
    distinct.sort_unstable_by(|a, b| a.partial_cmp(b).expect("scores validated finite"));
    distinct.dedup();

    let mut candidates = Vec::with_capacity(distinct.len() + 1);
    candidates.push(distinct[0] - 1.0);
    for pair in distinct.windows(2) {
        candidates.push((pair[0] + pair[1]) / 2.0);
    }
    candidates.push(distinct[distinct.len() - 1] + 1.0);

    let higher = scores.higher_means_change();
    let changed_side =
        |score: f64, threshold: f64| if higher { score > threshold } else { score < threshold };

    let n = (changed.len() + stable.len()) as f64;
    let mut best = (f64::NAN, -1.0);
    for &threshold in &candidates {
        let correct = changed
            .iter()
            .filter(|&&s| changed_side(s, threshold))
            .count()
            + stable
                .iter()
                .filter(|&&s| !changed_side(s, threshold))
                .count();
        let accuracy = correct as f64 / n;
        if accuracy > best.1 {
            best = (threshold, accuracy);
        }
    }
    Ok(best)
}

/// Discrimination summary for one (measure, aggregation, k) point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub measure: ChangeMeasure,
    pub k: usize,
    pub aggregation: Aggregation,
    pub changed_range: (f64, f64),
    pub stable_range: (f64, f64),
    pub overlap: Option<(f64, f64)>,
    pub best_threshold: f64,
    pub best_accuracy: f64,
}

/// Runs the full analysis grid: for every measure, aggregation and k,
/// scores all targets, computes the class ranges and the best threshold.
/// Grid points are independent and evaluated in parallel.
pub fn sweep_k(
    m0: &EmbeddingModel,
    m1: &EmbeddingModel,
    targets: &[(String, TokenKey)],
    gold: &GoldLabels,
    k_values: &[usize],
    measures: &[ChangeMeasure],
    aggregations: &[Aggregation],
) -> Result<Vec<SweepRecord>> {
    if k_values.is_empty() {
        return Err(Error::InvalidArgument("no k values".into()));
    }
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no targets".into()));
    }
    let mut grid = Vec::new();
    for &measure in measures {
        for &aggregation in aggregations {
            for &k in k_values {
                grid.push((measure, aggregation, k));
            }
        }
    }
    grid.into_par_iter()
        .map(|(measure, aggregation, k)| {
            let rows: BTreeMap<String, f64> = targets
                .iter()
                .map(|(name, key)| {
                    change_score(m0, m1, key, k, aggregation, measure)
                        .map(|score| (name.clone(), score))
                })
                .collect::<Result<_>>()?;
            let table = ScoreTable::new(rows, measure.higher_means_change())?;
            let ranges = class_ranges(&table, gold)?;
            let (threshold, accuracy) = best_threshold(&table, gold)?;
            Ok(SweepRecord {
                measure,
                k,
                aggregation,
                changed_range: ranges.changed,
                stable_range: ranges.stable,
                overlap: ranges.overlap,
                best_threshold: threshold,
                best_accuracy: accuracy,
            })
        })
        .collect()
}

/// Writes sweep records as a plottable CSV. Overlap fields are left
/// empty when the class ranges are disjoint.
pub fn write_sweep_csv<W: Write>(mut writer: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(
        writer,
        "measure,aggregation,k,changed_min,changed_max,stable_min,stable_max,\
         overlap_min,overlap_max,best_threshold,best_accuracy"
    )?;
    for r in records {
        let (overlap_min, overlap_max) = match r.overlap {
            Some((lo, hi)) => (format!("{lo:.6}"), format!("{hi:.6}")),
            None => (String::new(), String::new()),
        };
        writeln!(
            writer,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{:.6},{:.4}",
            r.measure,
            r.aggregation,
            r.k,
            r.changed_range.0,
            r.changed_range.1,
            r.stable_range.0,
            r.stable_range.1,
            overlap_min,
            overlap_max,
            r.best_threshold,
            r.best_accuracy
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::decide::Scheme;

    fn gold(rows: &[(&str, bool)]) -> GoldLabels {
        GoldLabels::new(rows.iter().map(|(t, c)| (t.to_string(), *c)).collect()).unwrap()
    }

    fn table(rows: &[(&str, f64)], higher: bool) -> ScoreTable {
        ScoreTable::new(
            rows.iter().map(|(t, s)| (t.to_string(), *s)).collect(),
            higher,
        )
        .unwrap()
    }

    fn prediction(changed: &[&str]) -> PredictionSet {
        PredictionSet::new(
            Scheme::System1,
            changed.iter().map(|t| t.to_string()).collect(),
        )
    }

    fn eighteen_targets(changed: &[&str], fp: &str, fns: &[&str]) -> (PredictionSet, GoldLabels) {
        // 18 targets: the listed ones changed in gold, the rest stable.
        let names: Vec<String> = (0..18 - changed.len() - 1)
            .map(|i| format!("filler{i:02}"))
            .collect();
        let mut rows: Vec<(String, bool)> = names.iter().map(|n| (n.clone(), false)).collect();
        for c in changed {
            rows.push((c.to_string(), true));
        }
        rows.push((fp.to_string(), false));
        let gold = GoldLabels::new(rows.into_iter().collect()).unwrap();

        let mut predicted: Vec<&str> = changed
            .iter()
            .copied()
            .filter(|c| !fns.contains(c))
            .collect();
        predicted.push(fp);
        (prediction(&predicted), gold)
    }

    #[test]
    fn one_fp_one_fn_out_of_18() {
        let changed = ["lucciola", "ape", "cappuccio", "unico", "tac", "rampante"];
        let (pred, gold) = eighteen_targets(&changed, "polisportiva", &["rampante"]);
        let report = evaluate(&pred, &gold).unwrap();
        assert_eq!(report.n, 18);
        assert_eq!(report.false_positives, vec!["polisportiva".to_string()]);
        assert_eq!(report.false_negatives, vec!["rampante".to_string()]);
        assert_abs_diff_eq!(report.accuracy, 16.0 / 18.0, epsilon = 1e-12);
    }

    #[test]
    fn one_fp_two_fn_out_of_18() {
        let changed = ["lucciola", "ape", "cappuccio", "unico", "tac", "rampante"];
        let (pred, gold) = eighteen_targets(&changed, "egemonizzare", &["lucciola", "ape"]);
        let report = evaluate(&pred, &gold).unwrap();
        assert_abs_diff_eq!(report.accuracy, 15.0 / 18.0, epsilon = 1e-12);
        assert_eq!(report.false_negatives.len(), 2);
    }

    #[test]
    fn perfect_prediction() {
        let g = gold(&[("a", true), ("b", false), ("c", true)]);
        let report = evaluate(&prediction(&["a", "c"]), &g).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert!(report.false_positives.is_empty());
        assert!(report.false_negatives.is_empty());
    }

    #[test]
    fn evaluate_requires_gold_coverage() {
        let g = gold(&[("a", true)]);
        match evaluate(&prediction(&["a", "mystery"]), &g) {
            Err(Error::MissingGoldLabel(t)) => assert_eq!(t, "mystery"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ranges_separated_classes() {
        let t = table(&[("a", 0.8), ("b", 0.9), ("c", 0.1), ("d", 0.2)], true);
        let g = gold(&[("a", true), ("b", true), ("c", false), ("d", false)]);
        let ranges = class_ranges(&t, &g).unwrap();
        assert_eq!(ranges.changed, (0.8, 0.9));
        assert_eq!(ranges.stable, (0.1, 0.2));
        assert_eq!(ranges.overlap, None);
    }

    #[test]
    fn ranges_overlapping_classes() {
        let t = table(&[("a", 0.5), ("b", 0.9), ("c", 0.1), ("d", 0.6)], true);
        let g = gold(&[("a", true), ("b", true), ("c", false), ("d", false)]);
        let ranges = class_ranges(&t, &g).unwrap();
        assert_eq!(ranges.overlap, Some((0.5, 0.6)));
    }

    #[test]
    fn ranges_degenerate_when_scores_equal() {
        let t = table(&[("a", 0.5), ("b", 0.5)], true);
        let g = gold(&[("a", true), ("b", false)]);
        let ranges = class_ranges(&t, &g).unwrap();
        assert_eq!(ranges.changed, (0.5, 0.5));
        assert_eq!(ranges.stable, (0.5, 0.5));
        assert_eq!(ranges.overlap, Some((0.5, 0.5)));
    }

    #[test]
    fn ranges_require_both_classes() {
        let t = table(&[("a", 0.5), ("b", 0.6)], true);
        let g = gold(&[("a", true), ("b", true)]);
        assert!(matches!(class_ranges(&t, &g), Err(Error::EmptyClass("stable"))));
    }

    #[test]
    fn threshold_separates_clean_classes() {
        let t = table(&[("a", 0.8), ("b", 0.9), ("c", 0.1), ("d", 0.2)], true);
        let g = gold(&[("a", true), ("b", true), ("c", false), ("d", false)]);
        let (threshold, accuracy) = best_threshold(&t, &g).unwrap();
        assert_abs_diff_eq!(threshold, 0.5, epsilon = 1e-9);
        assert_eq!(accuracy, 1.0);
    }

    #[test]
    fn threshold_on_interleaved_classes() {
        // changed {0.5}, stable {0.4, 0.6}: best any threshold gets 2/3.
        let t = table(&[("a", 0.5), ("b", 0.4), ("c", 0.6)], true);
        let g = gold(&[("a", true), ("b", false), ("c", false)]);
        let (threshold, accuracy) = best_threshold(&t, &g).unwrap();
        assert_abs_diff_eq!(accuracy, 2.0 / 3.0, epsilon = 1e-12);
        // Smallest candidate achieving 2/3 is the (0.4, 0.5) midpoint.
        assert_abs_diff_eq!(threshold, 0.45, epsilon = 1e-9);
    }

    #[test]
    fn threshold_majority_floor_on_constant_scores() {
        let t = table(&[("a", 0.7), ("b", 0.7), ("c", 0.7)], true);
        let g = gold(&[("a", false), ("b", false), ("c", true)]);
        let (_, accuracy) = best_threshold(&t, &g).unwrap();
        assert_abs_diff_eq!(accuracy, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn threshold_respects_direction() {
        // Lower means more change: changed scores sit below stable ones.
        let t = table(&[("a", 0.1), ("b", 0.2), ("c", 0.8), ("d", 0.9)], false);
        let g = gold(&[("a", true), ("b", true), ("c", false), ("d", false)]);
        let (threshold, accuracy) = best_threshold(&t, &g).unwrap();
        assert_eq!(accuracy, 1.0);
        assert_abs_diff_eq!(threshold, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn sweep_csv_layout() {
        let records = vec![
            SweepRecord {
                measure: ChangeMeasure::AvgAbsDiff,
                k: 10,
                aggregation: Aggregation::T0Only,
                changed_range: (0.5, 0.9),
                stable_range: (0.0, 0.2),
                overlap: None,
                best_threshold: 0.35,
                best_accuracy: 1.0,
            },
            SweepRecord {
                measure: ChangeMeasure::CosineSimilarity,
                k: 10,
                aggregation: Aggregation::Union,
                changed_range: (0.1, 0.6),
                stable_range: (0.5, 0.9),
                overlap: Some((0.5, 0.6)),
                best_threshold: 0.55,
                best_accuracy: 0.8333,
            },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "measure,aggregation,k,changed_min,changed_max,stable_min,stable_max,overlap_min,overlap_max,best_threshold,best_accuracy"
        );
        assert_eq!(
            lines.next().unwrap(),
            "aad,t0-only,10,0.500000,0.900000,0.000000,0.200000,,,0.350000,1.0000"
        );
        assert!(lines.next().unwrap().starts_with("cos-sim,union,10,"));
    }

    #[test]
    fn gold_file_roundtrip() {
        let text = "# gold\nape\t1\ncasa\t0\n";
        let g = GoldLabels::from_reader(text.as_bytes()).unwrap();
        assert_eq!(g.get("ape"), Some(true));
        assert_eq!(g.get("casa"), Some(false));
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let again = GoldLabels::from_reader(&buf[..]).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn gold_file_rejects_bad_labels_and_duplicates() {
        assert!(GoldLabels::from_reader("ape\t2\n".as_bytes()).is_err());
        assert!(GoldLabels::from_reader("ape\t1\nape\t0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn accuracy_identity_holds(
            n in 2usize..30,
            labels in prop::collection::vec(any::<bool>(), 30),
            predicted in prop::collection::vec(any::<bool>(), 30),
        ) {
            let g = GoldLabels::new(
                (0..n).map(|i| (format!("t{i:02}"), labels[i])).collect(),
            ).unwrap();
            let p = PredictionSet::new(
                Scheme::System2,
                (0..n).filter(|&i| predicted[i]).map(|i| format!("t{i:02}")).collect(),
            );
            let report = evaluate(&p, &g).unwrap();
            let lhs = (report.accuracy * report.n as f64).round() as usize
                + report.false_positives.len()
                + report.false_negatives.len();
            prop_assert_eq!(lhs, report.n);
        }

        #[test]
        fn best_threshold_beats_majority_and_separates_disjoint(
            n_changed in 1usize..10,
            n_stable in 1usize..10,
            changed_base in 0.0..10.0f64,
            gap in 0.001..5.0f64,
            spread in prop::collection::vec(0.0..1.0f64, 20),
        ) {
            // Direction-consistent data: changed scores strictly above stable.
            let stable_top = changed_base;
            let changed_bottom = changed_base + gap;
            let mut rows = BTreeMap::new();
            let mut labels = BTreeMap::new();
            for (i, offset) in spread.iter().take(n_stable).enumerate() {
                rows.insert(format!("s{i:02}"), stable_top - offset);
                labels.insert(format!("s{i:02}"), false);
            }
            for (i, offset) in spread[10..10 + n_changed].iter().enumerate() {
                rows.insert(format!("c{i:02}"), changed_bottom + offset);
                labels.insert(format!("c{i:02}"), true);
            }
            let t = ScoreTable::new(rows, true).unwrap();
            let g = GoldLabels::new(labels).unwrap();

            let (_, accuracy) = best_threshold(&t, &g).unwrap();
            let majority = n_changed.max(n_stable) as f64 / (n_changed + n_stable) as f64;
            prop_assert!(accuracy >= majority - 1e-12);

            let ranges = class_ranges(&t, &g).unwrap();
            if ranges.overlap.is_none() {
                prop_assert_eq!(accuracy, 1.0);
            }
        }
    }
}
