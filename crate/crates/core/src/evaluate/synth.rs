//! Synthetic diachronic corpus generator.
//!
//! Desk-scale stand-in for the unavailable shared-task corpora: every
//! pseudo-target co-occurs with topic-A words in T0; changed targets
//! draw a configurable fraction of their T1 contexts from topic B, and
//! can additionally have a fraction of their T1 occurrences retagged to
//! another POS category.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Epoch, PosCategory, Sentence, Token};
use crate::error::{Error, Result};
use crate::evaluate::GoldLabels;

/// Context words on each side of a target occurrence.
const CONTEXT_HALF: usize = 4;
/// Distinct topic words sampled per sentence.
const SENTENCE_WIDTH: usize = 2 * CONTEXT_HALF;

/// Retag `fraction` of a changed target's T1 occurrences from one
/// category to another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosShift {
    pub from: PosCategory,
    pub to: PosCategory,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_changed: usize,
    pub n_stable: usize,
    pub sentences_per_epoch: usize,
    pub topic_vocab_size: usize,
    /// Fraction of a changed target's T1 occurrences whose context is
    /// drawn from topic B.
    pub shift_strength: f64,
    pub pos_shift: Option<PosShift>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_changed: 10,
            n_stable: 10,
            sentences_per_epoch: 20_000,
            topic_vocab_size: 200,
            shift_strength: 1.0,
            pos_shift: None,
            seed: 1,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_changed < 1 || self.n_stable < 1 {
            return Err(Error::InvalidConfig(
                "need at least one changed and one stable target".into(),
            ));
        }
        if self.sentences_per_epoch < 1 {
            return Err(Error::InvalidConfig("sentences_per_epoch must be >= 1".into()));
        }
        if self.topic_vocab_size < SENTENCE_WIDTH {
            return Err(Error::InvalidConfig(format!(
                "topic_vocab_size {} too small to fill context windows (need >= {SENTENCE_WIDTH})",
                self.topic_vocab_size
            )));
        }
        if !(0.0..=1.0).contains(&self.shift_strength) {
            return Err(Error::InvalidConfig("shift_strength must be in [0, 1]".into()));
        }
        if let Some(shift) = &self.pos_shift {
            if !(0.0..=1.0).contains(&shift.fraction) {
                return Err(Error::InvalidConfig("pos_shift fraction must be in [0, 1]".into()));
            }
            if shift.from == shift.to {
                return Err(Error::InvalidConfig(
                    "pos_shift categories must differ".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Topic {
    A,
    B,
}

/// Evenly spreads `floor(n * fraction)` hits over ordinals `0..n`.
fn scheduled(ordinal: usize, fraction: f64) -> bool {
    ((ordinal + 1) as f64 * fraction).floor() > (ordinal as f64 * fraction).floor()
}

/// Generates the two epoch corpora and their gold labels,
/// deterministically in the seed.
pub fn generate_synthetic(config: &SynthConfig) -> Result<(Corpus, Corpus, GoldLabels)> {
    config.validate()?;

    let changed_names: Vec<String> = (0..config.n_changed).map(|i| format!("chg{i:03}")).collect();
    let stable_names: Vec<String> = (0..config.n_stable).map(|i| format!("stb{i:03}")).collect();
    let topic_a: Vec<String> = (0..config.topic_vocab_size).map(|i| format!("alfa{i:03}")).collect();
    let topic_b: Vec<String> = (0..config.topic_vocab_size).map(|i| format!("beta{i:03}")).collect();

    let base_pos = config.pos_shift.map(|s| s.from).unwrap_or(PosCategory::Noun);
    let n_targets = config.n_changed + config.n_stable;

    // Each target draws its contexts from its own band of the topic
    // vocabulary. Bands partition the topic when it is large enough
    // (>= n_targets * context width); otherwise they wrap and overlap.
    // Without per-target bands all targets would share one context
    // distribution and be mutual nearest neighbors whose geometry
    // survives the shift.
    let band_len = (config.topic_vocab_size / n_targets).max(SENTENCE_WIDTH);
    let bands: Vec<Vec<usize>> = (0..n_targets)
        .map(|i| {
            (0..band_len)
                .map(|j| (i * band_len + j) % config.topic_vocab_size)
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut build_epoch = |epoch: Epoch| -> Result<Corpus> {
        let mut sentences: Vec<Sentence> = Vec::with_capacity(config.sentences_per_epoch);
        let mut target_sentences = 0usize;
        // Per-target occurrence ordinals drive the T1 shift schedules.
        let mut occurrences = vec![0usize; n_targets];

        for i in 0..config.sentences_per_epoch {
            // Every fifth sentence is topic-only filler so that both
            // topics are trained (and shared) in both epochs.
            if i % 5 == 4 {
                let topic = if (i / 5) % 2 == 0 { &topic_a } else { &topic_b };
                sentences.push(topic_sentence(&mut rng, topic)?);
                continue;
            }

            let target_idx = target_sentences % n_targets;
            target_sentences += 1;
            let ordinal = occurrences[target_idx];
            occurrences[target_idx] += 1;

            let is_changed = target_idx < config.n_changed;
            let name = if is_changed {
                &changed_names[target_idx]
            } else {
                &stable_names[target_idx - config.n_changed]
            };

            let mut topic = Topic::A;
            let mut pos = base_pos;
            if epoch == Epoch::T1 && is_changed {
                if scheduled(ordinal, config.shift_strength) {
                    topic = Topic::B;
                }
                if let Some(shift) = &config.pos_shift {
                    if scheduled(ordinal, shift.fraction) {
                        pos = shift.to;
                    }
                }
            }
            let topic = match topic {
                Topic::A => &topic_a,
                Topic::B => &topic_b,
            };
            sentences.push(target_sentence(
                &mut rng,
                name,
                pos,
                topic,
                &bands[target_idx],
            )?);
        }
        Corpus::new(epoch, sentences)
    };

    let t0 = build_epoch(Epoch::T0)?;
    let t1 = build_epoch(Epoch::T1)?;

    let labels: BTreeMap<String, bool> = changed_names
        .iter()
        .map(|n| (n.clone(), true))
        .chain(stable_names.iter().map(|n| (n.clone(), false)))
        .collect();
    Ok((t0, t1, GoldLabels::new(labels)?))
}

fn sample_words<'a>(
    rng: &mut ChaCha8Rng,
    topic: &'a [String],
    count: usize,
) -> Vec<&'a String> {
    rand::seq::index::sample(rng, topic.len(), count)
        .into_iter()
        .map(|i| &topic[i])
        .collect()
}

fn topic_sentence(rng: &mut ChaCha8Rng, topic: &[String]) -> Result<Sentence> {
    sample_words(rng, topic, SENTENCE_WIDTH)
        .into_iter()
        .map(|w| Token::new(w.clone(), "NOUN", w.clone()))
        .collect()
}

fn target_sentence(
    rng: &mut ChaCha8Rng,
    name: &str,
    pos: PosCategory,
    topic: &[String],
    band: &[usize],
) -> Result<Sentence> {
    let context: Vec<&String> = rand::seq::index::sample(rng, band.len(), SENTENCE_WIDTH)
        .into_iter()
        .map(|i| &topic[band[i]])
        .collect();
    let mut sentence = Vec::with_capacity(SENTENCE_WIDTH + 1);
    for w in &context[..CONTEXT_HALF] {
        sentence.push(Token::new((*w).clone(), "NOUN", (*w).clone())?);
    }
    sentence.push(Token::new(name, pos.tag(), name)?);
    for w in &context[CONTEXT_HALF..] {
        sentence.push(Token::new((*w).clone(), "NOUN", (*w).clone())?);
    }
    Ok(sentence)
}
