//! Per-epoch CBOW embeddings over token keys: training, persistence and
//! similarity queries.

mod train;

pub use train::train_cbow;

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::corpus::{Epoch, TokenKey};
use crate::error::{Error, Result};

/// Knobs of the CBOW trainer. `dim`, `window` and `min_count` carry the
/// published settings; the rest default to the usual off-the-shelf
/// values.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub subsample_threshold: f64,
    pub seed: u64,
    /// Single-threaded, seeded training that reproduces bit-identical
    /// vectors for the same corpus and config. When false, workers update
    /// the shared weights without synchronization.
    pub deterministic: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 256,
            window: 5,
            min_count: 3,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            final_lr: 1e-4,
            subsample_threshold: 1e-3,
            seed: 1,
            deterministic: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::InvalidConfig("dim must be >= 1".into()));
        }
        if self.window < 1 {
            return Err(Error::InvalidConfig("window must be >= 1".into()));
        }
        if self.min_count < 1 {
            return Err(Error::InvalidConfig("min_count must be >= 1".into()));
        }
        if self.negatives < 1 {
            return Err(Error::InvalidConfig("negatives must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.final_lr > 0.0 && self.final_lr <= self.initial_lr) {
            return Err(Error::InvalidConfig(
                "learning rates must satisfy 0 < final_lr <= initial_lr".into(),
            ));
        }
        Ok(())
    }
}

/// A trained (or loaded) embedding model for one epoch. Rows are kept in
/// a fixed order so that persistence and queries are reproducible.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    epoch: Epoch,
    dim: usize,
    keys: Vec<TokenKey>,
    index: HashMap<TokenKey, usize>,
    data: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingModel {
    /// Builds a model from explicit rows, validating dimensions and
    /// finiteness. Row order is preserved.
    pub fn from_rows(epoch: Epoch, dim: usize, rows: Vec<(TokenKey, Vec<f32>)>) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        let mut keys = Vec::with_capacity(rows.len());
        let mut index = HashMap::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (key, vector) in rows {
            if vector.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "vector for {key} has length {}, expected {dim}",
                    vector.len()
                )));
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "vector for {key} has non-finite components"
                )));
            }
            if index.insert(key.clone(), keys.len()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate key {key}")));
            }
            keys.push(key);
            data.extend_from_slice(&vector);
        }
        let norms = data
            .chunks_exact(dim)
            .map(|row| row.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt())
            .collect();
        Ok(EmbeddingModel {
            epoch,
            dim,
            keys,
            index,
            data,
            norms,
        })
    }

    pub fn epoch(&self) -> Epoch {
        self.epoch
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: &TokenKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn keys(&self) -> &[TokenKey] {
        &self.keys
    }

    pub fn vector(&self, key: &TokenKey) -> Option<&[f32]> {
        self.index
            .get(key)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TokenKey, &[f32])> {
        self.keys.iter().zip(self.data.chunks_exact(self.dim))
    }

    fn row(&self, key: &TokenKey) -> Result<usize> {
        self.index.get(key).copied().ok_or_else(|| Error::OutOfVocabulary {
            key: key.to_string(),
            epoch: self.epoch,
        })
    }

    /// Cosine of the stored vectors of `a` and `b`.
    pub fn cosine_similarity(&self, a: &TokenKey, b: &TokenKey) -> Result<f64> {
        let (ia, ib) = (self.row(a)?, self.row(b)?);
        if self.norms[ia] == 0.0 || self.norms[ib] == 0.0 {
            return Err(Error::ZeroNorm(format!(
                "cosine similarity of {a} and {b} in {}",
                self.epoch
            )));
        }
        let va = &self.data[ia * self.dim..(ia + 1) * self.dim];
        let vb = &self.data[ib * self.dim..(ib + 1) * self.dim];
        let dot: f64 = va
            .iter()
            .zip(vb)
            .map(|(&x, &y)| x as f64 * y as f64)
            .sum();
        Ok(dot / (self.norms[ia] * self.norms[ib]))
    }

    /// The `k` keys most similar to `target` (excluding the target
    /// itself), optionally restricted to a candidate set. Ordered by
    /// descending similarity, ties broken lexicographically. Returns
    /// fewer than `k` entries when the candidate pool is smaller;
    /// zero-norm candidates have no defined similarity and are skipped.
    pub fn nearest_neighbors(
        &self,
        target: &TokenKey,
        k: usize,
        restrict: Option<&BTreeSet<TokenKey>>,
    ) -> Result<Vec<(TokenKey, f64)>> {
        if k < 1 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let it = self.row(target)?;
        if self.norms[it] == 0.0 {
            return Err(Error::ZeroNorm(format!(
                "target {target} in {}",
                self.epoch
            )));
        }
        let vt = &self.data[it * self.dim..(it + 1) * self.dim];

        let mut scored = Vec::new();
        for (i, key) in self.keys.iter().enumerate() {
            if i == it || self.norms[i] == 0.0 {
                continue;
            }
            if let Some(allowed) = restrict {
                if !allowed.contains(key) {
                    continue;
                }
            }
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let dot: f64 = vt
                .iter()
                .zip(row)
                .map(|(&x, &y)| x as f64 * y as f64)
                .sum();
            scored.push((key.clone(), dot / (self.norms[it] * self.norms[i])));
        }
        scored.sort_unstable_by(|(ka, sa), (kb, sb)| {
            sb.partial_cmp(sa).expect("similarities are finite").then_with(|| ka.cmp(kb))
        });
        scored.truncate(k);
        Ok(scored)
    }

    /// Writes the word2vec text format: a `vocab_size dim` header, then
    /// one line per key with the components space-separated. Components
    /// are rendered as shortest round-tripping decimals, so loading
    /// recovers them exactly.
    pub fn write_word2vec<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dim)?;
        let mut line = String::new();
        for (key, row) in self.iter() {
            line.clear();
            line.push_str(key.as_str());
            for value in row {
                line.push(' ');
                line.push_str(&value.to_string());
            }
            writeln!(writer, "{line}")?;
        }
        Ok(())
    }

    /// Reads the format written by [`EmbeddingModel::write_word2vec`].
    pub fn read_word2vec<R: BufRead>(reader: R, epoch: Epoch) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::EmbeddingFormat {
                line: 1,
                msg: "missing header".into(),
            })??;
        let mut parts = header.split_whitespace();
        let (vocab_size, dim) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(d), None) => {
                let n: usize = n.parse().map_err(|_| Error::EmbeddingFormat {
                    line: 1,
                    msg: format!("invalid vocabulary size {n:?}"),
                })?;
                let d: usize = d.parse().map_err(|_| Error::EmbeddingFormat {
                    line: 1,
                    msg: format!("invalid dimension {d:?}"),
                })?;
                (n, d)
            }
            _ => {
                return Err(Error::EmbeddingFormat {
                    line: 1,
                    msg: "header must be \"vocab_size dim\"".into(),
                })
            }
        };
        if dim < 1 {
            return Err(Error::EmbeddingFormat {
                line: 1,
                msg: "dimension must be >= 1".into(),
            });
        }

        let mut rows = Vec::with_capacity(vocab_size);
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let key = fields.next().ok_or_else(|| Error::EmbeddingFormat {
                line: line_no,
                msg: "missing key".into(),
            })?;
            let key = TokenKey::parse(key).map_err(|e| Error::EmbeddingFormat {
                line: line_no,
                msg: e.to_string(),
            })?;
            let mut vector = Vec::with_capacity(dim);
            for field in fields {
                let value: f32 = field.parse().map_err(|_| Error::EmbeddingFormat {
                    line: line_no,
                    msg: format!("non-numeric component {field:?}"),
                })?;
                if !value.is_finite() {
                    return Err(Error::EmbeddingFormat {
                        line: line_no,
                        msg: format!("non-finite component {field:?}"),
                    });
                }
                vector.push(value);
            }
            if vector.len() != dim {
                return Err(Error::EmbeddingFormat {
                    line: line_no,
                    msg: format!("expected {dim} components, got {}", vector.len()),
                });
            }
            rows.push((key, vector));
        }
        if rows.len() != vocab_size {
            return Err(Error::EmbeddingFormat {
                line: rows.len() + 1,
                msg: format!(
                    "header declares {vocab_size} rows, found {}",
                    rows.len()
                ),
            });
        }
        EmbeddingModel::from_rows(epoch, dim, rows).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::EmbeddingFormat { line: 0, msg },
            other => other,
        })
    }
}
