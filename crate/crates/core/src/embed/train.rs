//! CBOW trainer with negative sampling.
//!
//! The weight matrices are shared across workers as relaxed atomics: in
//! deterministic mode a single seeded worker touches them, in fast mode
//! several workers update them without synchronization.

use std::ops::Range;
use std::sync::atomic::{AtomicU32, AtomicU64, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, TokenKey, Vocabulary};
use crate::embed::{EmbeddingModel, TrainingConfig};
use crate::error::{Error, Result};

/// An f32 weight cell that tolerates unsynchronized updates.
#[repr(transparent)]
struct Weight(AtomicU32);

impl Weight {
    fn zero() -> Self {
        Weight(AtomicU32::new(0f32.to_bits()))
    }

    fn get(&self) -> f32 {
        f32::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn set(&self, value: f32) {
        self.0.store(value.to_bits(), Ordering::Relaxed);
    }

    fn add(&self, delta: f32) {
        self.set(self.get() + delta);
    }
}

struct TrainContext<'a> {
    input: &'a [Weight],
    output: &'a [Weight],
    sentences: &'a [Vec<u32>],
    keep_prob: &'a [f32],
    negative_cdf: &'a [f64],
    config: &'a TrainingConfig,
    /// Tokens scheduled over the whole run: token count times epochs.
    total_words: u64,
    words_done: AtomicU64,
    /// 0 while healthy, otherwise the 1-based pass that diverged.
    diverged: AtomicUsize,
}

/// Trains CBOW embeddings with negative sampling over the corpus token
/// keys. Context vectors are averaged over a per-position window drawn
/// uniformly from `1..=window`; negatives are drawn from the unigram
/// distribution raised to the 3/4 power; the learning rate decays
/// linearly from `initial_lr` to `final_lr` over all passes.
pub fn train_cbow(corpus: &Corpus, config: &TrainingConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Training("corpus is empty".into()));
    }

    let vocab = Vocabulary::from_corpus(corpus, config.min_count)?;
    if vocab.len() < 2 {
        return Err(Error::Training(format!(
            "effective vocabulary has {} key(s), need at least 2",
            vocab.len()
        )));
    }

    // Canonical word order: most frequent first, ties lexicographic.
    let mut words: Vec<(TokenKey, u64)> = vocab.iter().map(|(k, c)| (k.clone(), c)).collect();
    words.sort_unstable_by(|(ka, ca), (kb, cb)| cb.cmp(ca).then_with(|| ka.cmp(kb)));
    let index: std::collections::HashMap<&TokenKey, u32> = words
        .iter()
        .enumerate()
        .map(|(i, (k, _))| (k, i as u32))
        .collect();

    let sentences: Vec<Vec<u32>> = corpus
        .sentences()
        .iter()
        .map(|sentence| {
            sentence
                .iter()
                .filter_map(|token| index.get(&token.key()).copied())
                .collect::<Vec<u32>>()
        })
        .filter(|encoded| !encoded.is_empty())
        .collect();
    let token_count: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    if token_count == 0 {
        return Err(Error::Training("no in-vocabulary tokens".into()));
    }

    let keep_prob = subsample_keep_probabilities(&words, token_count, config.subsample_threshold);
    let negative_cdf = negative_sampling_cdf(&words);

    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let input: Vec<Weight> = (0..words.len() * dim)
        .map(|_| {
            let cell = Weight::zero();
            cell.set((rng.random::<f32>() - 0.5) / dim as f32);
            cell
        })
        .collect();
    let output: Vec<Weight> = (0..words.len() * dim).map(|_| Weight::zero()).collect();

    let ctx = TrainContext {
        input: &input,
        output: &output,
        sentences: &sentences,
        keep_prob: &keep_prob,
        negative_cdf: &negative_cdf,
        config,
        total_words: token_count * config.epochs as u64,
        words_done: AtomicU64::new(0),
        diverged: AtomicUsize::new(0),
    };

    if config.deterministic {
        run_worker(&ctx, 0..sentences.len(), ChaCha8Rng::seed_from_u64(config.seed));
    } else {
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(sentences.len());
        let chunk = sentences.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for worker in 0..workers {
                let ctx = &ctx;
                let start = worker * chunk;
                let end = ((worker + 1) * chunk).min(sentences.len());
                let rng = ChaCha8Rng::seed_from_u64(
                    config.seed ^ (worker as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                );
                scope.spawn(move || run_worker(ctx, start..end, rng));
            }
        });
    }

    let diverged = ctx.diverged.load(Ordering::Relaxed);
    if diverged != 0 {
        return Err(Error::NumericDivergence {
            epoch: corpus.epoch(),
            pass: diverged,
        });
    }

    let rows: Vec<(TokenKey, Vec<f32>)> = words
        .into_iter()
        .enumerate()
        .map(|(i, (key, _))| {
            let row = input[i * dim..(i + 1) * dim].iter().map(Weight::get).collect();
            (key, row)
        })
        .collect();
    // Backstop: unsynchronized updates must still leave finite weights.
    if rows
        .iter()
        .any(|(_, row)| row.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NumericDivergence {
            epoch: corpus.epoch(),
            pass: config.epochs,
        });
    }
    EmbeddingModel::from_rows(corpus.epoch(), dim, rows)
}

/// Classic word2vec keep probability `sqrt(t/f) + t/f`, clamped to 1.
/// A non-positive threshold disables subsampling.
fn subsample_keep_probabilities(
    words: &[(TokenKey, u64)],
    token_count: u64,
    threshold: f64,
) -> Vec<f32> {
    words
        .iter()
        .map(|(_, count)| {
            if threshold <= 0.0 {
                return 1.0;
            }
            let freq = *count as f64 / token_count as f64;
            let ratio = threshold / freq;
            (ratio.sqrt() + ratio).min(1.0) as f32
        })
        .collect()
}

/// Cumulative unigram counts raised to the 3/4 power. Depends only on
/// the vocabulary order, not on iteration order.
fn negative_sampling_cdf(words: &[(TokenKey, u64)]) -> Vec<f64> {
    let mut acc = 0.0;
    words
        .iter()
        .map(|(_, count)| {
            acc += (*count as f64).powf(0.75);
            acc
        })
        .collect()
}

fn sample_negative(rng: &mut ChaCha8Rng, cdf: &[f64]) -> usize {
    let x = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
}

fn run_worker(ctx: &TrainContext<'_>, range: Range<usize>, mut rng: ChaCha8Rng) {
    let dim = ctx.config.dim;
    let window = ctx.config.window;
    let negatives = ctx.config.negatives;
    let initial_lr = ctx.config.initial_lr;
    let final_lr = ctx.config.final_lr;

    let mut hidden = vec![0f32; dim];
    let mut gradient = vec![0f32; dim];
    let mut kept: Vec<u32> = Vec::new();

    for pass in 0..ctx.config.epochs {
        for sentence in &ctx.sentences[range.clone()] {
            if ctx.diverged.load(Ordering::Relaxed) != 0 {
                return;
            }
            let done = ctx.words_done.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            let progress = (done as f64 / ctx.total_words as f64).min(1.0);
            let alpha = (initial_lr - (initial_lr - final_lr) * progress) as f32;

            kept.clear();
            for &word in sentence {
                let keep = ctx.keep_prob[word as usize];
                if keep >= 1.0 || rng.random::<f32>() < keep {
                    kept.push(word);
                }
            }

            for center_pos in 0..kept.len() {
                let center = kept[center_pos] as usize;
                let span = rng.random_range(1..=window);
                let lo = center_pos.saturating_sub(span);
                let hi = (center_pos + span).min(kept.len() - 1);

                hidden.fill(0.0);
                let mut context_size = 0f32;
                for (j, &word) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == center_pos {
                        continue;
                    }
                    let row = &ctx.input[word as usize * dim..(word as usize + 1) * dim];
                    for (h, cell) in hidden.iter_mut().zip(row) {
                        *h += cell.get();
                    }
                    context_size += 1.0;
                }
                if context_size == 0.0 {
                    continue;
                }
                for h in hidden.iter_mut() {
                    *h /= context_size;
                }

                gradient.fill(0.0);
                for sample in 0..=negatives {
                    let (target, label) = if sample == 0 {
                        (center, 1f32)
                    } else {
                        let negative = sample_negative(&mut rng, ctx.negative_cdf);
                        if negative == center {
                            continue;
                        }
                        (negative, 0f32)
                    };
                    let row = &ctx.output[target * dim..(target + 1) * dim];
                    let score: f32 = hidden.iter().zip(row).map(|(h, cell)| h * cell.get()).sum();
                    if !score.is_finite() {
                        let _ = ctx.diverged.compare_exchange(
                            0,
                            pass + 1,
                            Ordering::Relaxed,
                            Ordering::Relaxed,
                        );
                        return;
                    }
                    let predicted = 1.0 / (1.0 + (-score).exp());
                    let g = (label - predicted) * alpha;
                    for ((grad, h), cell) in gradient.iter_mut().zip(&hidden).zip(row) {
                        *grad += g * cell.get();
                        cell.add(g * *h);
                    }
                }

                for (j, &word) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == center_pos {
                        continue;
                    }
                    let row = &ctx.input[word as usize * dim..(word as usize + 1) * dim];
                    for (cell, grad) in row.iter().zip(&gradient) {
                        cell.add(*grad);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::seq::IndexedRandom;

    use super::*;
    use crate::corpus::{Epoch, Token};

    fn cluster_corpus(sentences_per_cluster: usize, seed: u64) -> Corpus {
        // Two topic clusters; the oracle for similarity checks is the
        // cluster assignment itself.
        let cluster_a: Vec<String> = (0..8).map(|i| format!("ape{i}")).collect();
        let cluster_b: Vec<String> = (0..8).map(|i| format!("bue{i}")).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sentences = Vec::new();
        for cluster in [&cluster_a, &cluster_b] {
            for _ in 0..sentences_per_cluster {
                let sentence: Vec<Token> = (0..8)
                    .map(|_| {
                        let w = cluster.choose(&mut rng).unwrap();
                        Token::new(w.clone(), "NOUN", w.clone()).unwrap()
                    })
                    .collect();
                sentences.push(sentence);
            }
        }
        Corpus::new(Epoch::T0, sentences).unwrap()
    }

    fn small_config() -> TrainingConfig {
        TrainingConfig {
            dim: 32,
            window: 4,
            min_count: 1,
            negatives: 5,
            epochs: 25,
            seed: 1,
            deterministic: true,
            ..TrainingConfig::default()
        }
    }

    fn key(s: &str) -> TokenKey {
        TokenKey::parse(s).unwrap()
    }

    #[test]
    fn training_rejects_empty_corpus() {
        let corpus = Corpus::new(Epoch::T0, Vec::new()).unwrap();
        assert!(matches!(
            train_cbow(&corpus, &small_config()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn training_rejects_tiny_vocabulary() {
        let token = Token::new("solo", "ADV", "solo").unwrap();
        let corpus = Corpus::new(Epoch::T0, vec![vec![token.clone(), token]]).unwrap();
        assert!(matches!(
            train_cbow(&corpus, &small_config()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn clusters_separate_after_training() {
        let corpus = cluster_corpus(100, 7);
        let model = train_cbow(&corpus, &small_config()).unwrap();

        let a_keys: Vec<TokenKey> = (0..8).map(|i| key(&format!("ape{i}_NOUN"))).collect();
        let b_keys: Vec<TokenKey> = (0..8).map(|i| key(&format!("bue{i}_NOUN"))).collect();

        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for group in [&a_keys, &b_keys] {
            for i in 0..group.len() {
                for j in (i + 1)..group.len() {
                    intra.push(model.cosine_similarity(&group[i], &group[j]).unwrap());
                }
            }
        }
        for a in &a_keys {
            for b in &b_keys {
                inter.push(model.cosine_similarity(a, b).unwrap());
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&intra) > mean(&inter),
            "intra {} <= inter {}",
            mean(&intra),
            mean(&inter)
        );
        // Same-cluster pair beats a cross-cluster pair.
        let same = model.cosine_similarity(&a_keys[0], &a_keys[1]).unwrap();
        let cross = model.cosine_similarity(&a_keys[0], &b_keys[0]).unwrap();
        assert!(same > cross, "same {same} <= cross {cross}");
    }

    #[test]
    fn deterministic_training_is_bit_identical() {
        let corpus = cluster_corpus(30, 3);
        let config = TrainingConfig {
            epochs: 3,
            ..small_config()
        };
        let first = train_cbow(&corpus, &config).unwrap();
        let second = train_cbow(&corpus, &config).unwrap();
        assert_eq!(first.keys(), second.keys());
        for (k, row) in first.iter() {
            assert_eq!(row, second.vector(k).unwrap(), "key {k}");
        }
    }

    #[test]
    fn fast_mode_still_separates_clusters() {
        let corpus = cluster_corpus(100, 11);
        let config = TrainingConfig {
            deterministic: false,
            ..small_config()
        };
        let model = train_cbow(&corpus, &config).unwrap();
        let same = model
            .cosine_similarity(&key("ape0_NOUN"), &key("ape1_NOUN"))
            .unwrap();
        let cross = model
            .cosine_similarity(&key("ape0_NOUN"), &key("bue0_NOUN"))
            .unwrap();
        assert!(same > cross);
    }

    #[test]
    fn absurd_learning_rate_reports_divergence() {
        let corpus = cluster_corpus(50, 5);
        let config = TrainingConfig {
            initial_lr: 1e30,
            final_lr: 1e30,
            epochs: 50,
            ..small_config()
        };
        match train_cbow(&corpus, &config) {
            Err(Error::NumericDivergence { epoch, .. }) => assert_eq!(epoch, Epoch::T0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
