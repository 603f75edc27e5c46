//! Unsupervised lexical semantic change detection between two
//! time-sliced corpora.
//!
//! Two models represent each target word per epoch: a POS-distribution
//! model compared with an ensemble of distances, and a CBOW embedding
//! model compared through second-order neighbor similarities. Voting
//! schemes turn the resulting score tables into binary changed/stable
//! predictions, and the evaluation layer provides accuracy reports,
//! discrimination ranges, best-threshold search and a k-sweep analysis.

pub mod corpus;
pub mod decide;
pub mod embed;
pub mod error;
pub mod evaluate;
pub mod posdist;
pub mod secondorder;

pub use corpus::{
    parse_targets, pos_counts, resolve_target_key, Corpus, Epoch, PosCategory, PosCounts,
    Sentence, TargetSpec, Token, TokenKey, Vocabulary,
};
pub use decide::{
    rank, read_predictions, system1, system2, system3, write_predictions, PredictionSet,
    RankTable, Scheme, ScoreTable,
};
pub use embed::{train_cbow, EmbeddingModel, TrainingConfig};
pub use error::{Error, Result};
pub use evaluate::{
    best_threshold, class_ranges, evaluate, generate_synthetic, sweep_k, write_sweep_csv,
    ClassRanges, EvaluationReport, GoldLabels, PosShift, SweepRecord, SynthConfig,
};
pub use posdist::{distance, vector_distance, DistanceKind, PosDistribution};
pub use secondorder::{
    avg_abs_diff, change_score, common_vocabulary, cos_dist_measure, cos_sim_measure,
    neighbor_set, read_score_table, second_order_vector, write_score_table, Aggregation,
    ChangeMeasure, CommonVocabulary, NeighborSet, ScoreRow, SecondOrderVector,
};
