//! Cross-module integration checks.

use std::collections::BTreeMap;

use semshift::{
    evaluate, generate_synthetic, neighbor_set, sweep_k, system2, Aggregation, ChangeMeasure,
    EmbeddingModel, Epoch, GoldLabels, ScoreTable, SynthConfig, TokenKey, TrainingConfig,
    Vocabulary,
};

fn key(s: &str) -> TokenKey {
    TokenKey::parse(s).unwrap()
}

/// With one model standing in for both epochs every record degenerates
/// at the no-change extreme and the best threshold can only recover the
/// majority class.
///
/// Scalar vectors keep every cosine exactly +/-1, and k=4 keeps the
/// second-order norms exact, so the degeneracy holds bit-for-bit.
#[test]
fn sweep_on_identical_models_degenerates_to_majority() {
    let rows: Vec<(TokenKey, Vec<f32>)> = [1.0f32, 2.0, -1.0, 0.5, -3.0, 4.0]
        .iter()
        .enumerate()
        .map(|(i, &v)| (key(&format!("w{i}")), vec![v]))
        .collect();
    let model = EmbeddingModel::from_rows(Epoch::T0, 1, rows).unwrap();

    let targets: Vec<(String, TokenKey)> = model
        .keys()
        .iter()
        .map(|k| (k.to_string(), k.clone()))
        .collect();
    // 4 changed vs 2 stable: majority fraction 4/6.
    let gold = GoldLabels::new(
        targets
            .iter()
            .enumerate()
            .map(|(i, (name, _))| (name.clone(), i < 4))
            .collect(),
    )
    .unwrap();

    let records = sweep_k(
        &model,
        &model,
        &targets,
        &gold,
        &[4],
        &ChangeMeasure::ALL,
        &Aggregation::ALL,
    )
    .unwrap();
    assert_eq!(records.len(), 6);
    for record in records {
        let extreme = match record.measure {
            ChangeMeasure::AvgAbsDiff | ChangeMeasure::CosineDistance => 0.0,
            ChangeMeasure::CosineSimilarity => 1.0,
        };
        assert_eq!(record.changed_range, (extreme, extreme), "{:?}", record);
        assert_eq!(record.stable_range, (extreme, extreme), "{:?}", record);
        assert_eq!(record.overlap, Some((extreme, extreme)), "{:?}", record);
        assert_eq!(record.best_accuracy, 4.0 / 6.0, "{:?}", record);
    }
}

/// The neighbor list only depends on the geometry of its members:
/// adding an unrelated distant key to both vocabularies changes nothing.
#[test]
fn neighbor_set_ignores_unrelated_vocabulary() {
    let base = [
        ("t", vec![1.0f32, 0.0]),
        ("a", vec![0.9, 0.1]),
        ("b", vec![0.7, 0.3]),
        ("c", vec![0.0, 1.0]),
    ];
    let build = |extra: bool, epoch: Epoch| {
        let mut rows: Vec<(TokenKey, Vec<f32>)> = base
            .iter()
            .map(|(name, v)| (key(name), v.clone()))
            .collect();
        if extra {
            rows.push((key("zz"), vec![-1.0, -1.0]));
        }
        EmbeddingModel::from_rows(epoch, 2, rows).unwrap()
    };

    let plain = neighbor_set(
        &build(false, Epoch::T0),
        &build(false, Epoch::T1),
        &key("t"),
        2,
        Aggregation::T0Only,
    )
    .unwrap();
    let padded = neighbor_set(
        &build(true, Epoch::T0),
        &build(true, Epoch::T1),
        &key("t"),
        2,
        Aggregation::T0Only,
    )
    .unwrap();
    assert_eq!(plain.neighbors(), padded.neighbors());
}

#[test]
fn vocabulary_rejects_zero_min_count() {
    let corpus = semshift::Corpus::new(Epoch::T0, Vec::new()).unwrap();
    assert!(Vocabulary::from_corpus(&corpus, 0).is_err());
}

/// Library-level end-to-end sanity on a small synthetic pair.
#[test]
fn small_end_to_end_run() {
    let synth = SynthConfig {
        n_changed: 3,
        n_stable: 3,
        sentences_per_epoch: 1_200,
        topic_vocab_size: 48,
        shift_strength: 1.0,
        pos_shift: None,
        seed: 13,
    };
    let (t0, t1, gold) = generate_synthetic(&synth).unwrap();
    let training = TrainingConfig {
        dim: 48,
        epochs: 3,
        deterministic: true,
        seed: 1,
        ..TrainingConfig::default()
    };
    let m0 = semshift::train_cbow(&t0, &training).unwrap();
    let m1 = semshift::train_cbow(&t1, &training).unwrap();

    let mut aad = BTreeMap::new();
    let mut csim = BTreeMap::new();
    for (name, _) in gold.iter() {
        let target = TokenKey::new(name, "NOUN").unwrap();
        aad.insert(
            name.to_string(),
            semshift::change_score(
                &m0,
                &m1,
                &target,
                10,
                Aggregation::T0Only,
                ChangeMeasure::AvgAbsDiff,
            )
            .unwrap(),
        );
        csim.insert(
            name.to_string(),
            semshift::change_score(
                &m0,
                &m1,
                &target,
                10,
                Aggregation::T0Only,
                ChangeMeasure::CosineSimilarity,
            )
            .unwrap(),
        );
    }
    let prediction = system2(
        &ScoreTable::new(aad, true).unwrap(),
        &ScoreTable::new(csim, false).unwrap(),
    )
    .unwrap();
    let report = evaluate(&prediction, &gold).unwrap();
    assert_eq!(report.n, 6);
    // Full context shift at this scale separates cleanly.
    assert!(
        report.accuracy >= 5.0 / 6.0,
        "accuracy {} below expectation; fp {:?} fn {:?}",
        report.accuracy,
        report.false_positives,
        report.false_negatives
    );
}
