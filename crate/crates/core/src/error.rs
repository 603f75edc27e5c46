//! Crate-wide error type.

use std::io;

use thiserror::Error;

use crate::corpus::Epoch;

/// Alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed corpus or table line. Lines are 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: invalid UTF-8")]
    Encoding { line: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A target has no occurrence in any of the four POS categories.
    #[error("target {target:?} unobserved in {epoch}")]
    TargetUnobserved { target: String, epoch: Epoch },

    /// A target lemma without an explicit POS never occurs in either corpus.
    #[error("cannot resolve POS for target {0:?}: no occurrence in either corpus")]
    UnresolvedTarget(String),

    #[error("key {key:?} not in {epoch} vocabulary")]
    OutOfVocabulary { key: String, epoch: Epoch },

    #[error("training failed: {0}")]
    Training(String),

    /// Weights stopped being finite while training the given corpus epoch.
    #[error("non-finite values while training {epoch} (pass {pass})")]
    NumericDivergence { epoch: Epoch, pass: usize },

    #[error("embedding file line {line}: {msg}")]
    EmbeddingFormat { line: usize, msg: String },

    #[error("the two epoch vocabularies have no key in common")]
    EmptyIntersection,

    #[error("zero-norm vector: {0}")]
    ZeroNorm(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Score tables passed to a voting scheme cover different targets.
    #[error("target sets differ: missing {missing:?}, unexpected {extra:?}")]
    TargetSetMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("gold labels missing target {0:?}")]
    MissingGoldLabel(String),

    #[error("no targets labeled {0}")]
    EmptyClass(&'static str),
}
