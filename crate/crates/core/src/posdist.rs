//! POS-distribution representation of targets and the distance ensemble
//! used to compare the two epochs.

use std::fmt;
use std::str::FromStr;

use crate::corpus::{PosCategory, PosCounts};
use crate::error::{Error, Result};

/// Relative frequency of a target over the four retained POS categories,
/// in (ADJ, NOUN, PROPN, VERB) order. Components are non-negative and sum
/// to 1 within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosDistribution {
    values: [f64; 4],
}

impl PosDistribution {
    /// Normalizes the counts over the four categories only.
    pub fn from_counts(counts: &PosCounts) -> Result<Self> {
        let total = counts.total();
        if total == 0 {
            return Err(Error::TargetUnobserved {
                target: counts.target().to_string(),
                epoch: counts.epoch(),
            });
        }
        let mut values = [0f64; 4];
        for (value, category) in values.iter_mut().zip(PosCategory::ALL) {
            *value = counts.count(category) as f64 / total as f64;
        }
        Ok(PosDistribution { values })
    }

    /// Builds a distribution from raw fractions, validating the simplex
    /// invariants.
    pub fn from_values(values: [f64; 4]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "distribution components must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "distribution components sum to {sum}, expected 1"
            )));
        }
        Ok(PosDistribution { values })
    }

    pub fn values(&self) -> [f64; 4] {
        self.values
    }

    pub fn get(&self, category: PosCategory) -> f64 {
        self.values[category as usize]
    }
}

/// The three distances of the POS-model ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Euclidean,
    Manhattan,
    Cosine,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [
        DistanceKind::Euclidean,
        DistanceKind::Manhattan,
        DistanceKind::Cosine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Manhattan => "manhattan",
            DistanceKind::Cosine => "cosine",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(DistanceKind::Euclidean),
            "manhattan" => Ok(DistanceKind::Manhattan),
            "cosine" => Ok(DistanceKind::Cosine),
            other => Err(Error::InvalidArgument(format!(
                "unknown distance {other:?}"
            ))),
        }
    }
}

/// Distance between two POS distributions, computed at full precision.
pub fn distance(a: &PosDistribution, b: &PosDistribution, kind: DistanceKind) -> Result<f64> {
    vector_distance(&a.values, &b.values, kind)
}

/// Distance between two equal-length real vectors. Cosine distance is
/// `1 - a.b / (|a||b|)` and errors on a zero-norm input.
pub fn vector_distance(a: &[f64], b: &[f64], kind: DistanceKind) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    match kind {
        DistanceKind::Euclidean => Ok(a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()),
        DistanceKind::Manhattan => Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()),
        DistanceKind::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                return Err(Error::ZeroNorm("cosine distance input".into()));
            }
            Ok(1.0 - dot / (na * nb))
        }
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::corpus::Epoch;

    // Published POS usage rows for "polisportiva".
    const T0_ROW: [f64; 4] = [0.04, 0.18, 0.76, 0.02];
    const T1_ROW: [f64; 4] = [0.02, 0.61, 0.34, 0.02];

    #[test]
    fn distribution_from_table_counts() {
        let counts = PosCounts::new("polisportiva", Epoch::T0, [2, 9, 38, 1]);
        let dist = PosDistribution::from_counts(&counts).unwrap();
        for (got, want) in dist.values().iter().zip(T0_ROW) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn distribution_single_category() {
        let counts = PosCounts::new("x", Epoch::T0, [0, 10, 0, 0]);
        let dist = PosDistribution::from_counts(&counts).unwrap();
        assert_eq!(dist.values(), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn distribution_rejects_all_zero() {
        let counts = PosCounts::new("fantasma", Epoch::T1, [0, 0, 0, 0]);
        match PosDistribution::from_counts(&counts).unwrap_err() {
            Error::TargetUnobserved { target, epoch } => {
                assert_eq!(target, "fantasma");
                assert_eq!(epoch, Epoch::T1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn manhattan_on_published_rows() {
        // |0.04-0.02| + |0.18-0.61| + |0.76-0.34| + |0.02-0.02| = 0.87
        let d = vector_distance(&T0_ROW, &T1_ROW, DistanceKind::Manhattan).unwrap();
        assert_abs_diff_eq!(d, 0.87, epsilon = 1e-12);
    }

    #[test]
    fn euclidean_on_published_rows() {
        // sqrt(0.02^2 + 0.43^2 + 0.42^2 + 0) = sqrt(0.3617)
        let d = vector_distance(&T0_ROW, &T1_ROW, DistanceKind::Euclidean).unwrap();
        assert_abs_diff_eq!(d, 0.3617f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d, 0.6014, epsilon = 1e-4);
    }

    #[test]
    fn identical_distributions_have_zero_distance() {
        let dist = PosDistribution::from_values([0.25, 0.25, 0.25, 0.25]).unwrap();
        for kind in DistanceKind::ALL {
            assert_abs_diff_eq!(distance(&dist, &dist, kind).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cosine_guards_zero_norm() {
        assert!(matches!(
            vector_distance(&[0.0, 0.0], &[1.0, 0.0], DistanceKind::Cosine),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn from_values_validates_simplex() {
        assert!(PosDistribution::from_values([0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(PosDistribution::from_values([-0.1, 0.6, 0.5, 0.0]).is_err());
        assert!(PosDistribution::from_values([0.5, 0.5, 0.0, 0.0]).is_ok());
    }

    fn simplex() -> impl Strategy<Value = PosDistribution> {
        prop::array::uniform4(1e-6..1.0f64).prop_map(|raw| {
            let sum: f64 = raw.iter().sum();
            let mut values = raw.map(|v| v / sum);
            // Absorb the normalization residue so the invariant holds exactly.
            values[3] = 1.0 - values[0] - values[1] - values[2];
            PosDistribution::from_values(values).unwrap()
        })
    }

    proptest! {
        #[test]
        fn distances_are_symmetric_and_nonnegative(a in simplex(), b in simplex()) {
            for kind in DistanceKind::ALL {
                let d_ab = distance(&a, &b, kind).unwrap();
                let d_ba = distance(&b, &a, kind).unwrap();
                prop_assert!(d_ab >= 0.0);
                prop_assert_eq!(d_ab, d_ba);
            }
        }

        #[test]
        fn manhattan_dominates_euclidean(a in simplex(), b in simplex()) {
            let manhattan = distance(&a, &b, DistanceKind::Manhattan).unwrap();
            let euclidean = distance(&a, &b, DistanceKind::Euclidean).unwrap();
            prop_assert!(manhattan >= euclidean - 1e-12);
        }

        #[test]
        fn cosine_distance_in_unit_interval(a in simplex(), b in simplex()) {
            let d = distance(&a, &b, DistanceKind::Cosine).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
        }

        #[test]
        fn normalized_counts_sum_to_one(counts in prop::array::uniform4(0u64..1000)) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let counts = PosCounts::new("t", Epoch::T0, counts);
            let dist = PosDistribution::from_counts(&counts).unwrap();
            let sum: f64 = dist.values().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }
    }
}
