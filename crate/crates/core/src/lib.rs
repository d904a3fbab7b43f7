//! Semantic-similarity scoring and evaluation for text pairs.
//!
//! * [`gestalt`]: Ratcliff/Obershelp string matching.
//! * [`normalize`]: lemmatize, token-sort and rejoin text before matching.
//! * [`vecsim`]: angular and cosine scores over precomputed embeddings.
//! * [`ingest`]: pair datasets, embedding/score files, run manifests.
//! * [`eval`]: ROC, AUC, Youden threshold, confusion metrics, error lists.
//! * [`cli`]: the `score`, `eval` and `errors` commands.

pub mod cli;
pub mod eval;
pub mod gestalt;
pub mod ingest;
mod method;
pub mod normalize;
pub mod vecsim;

pub use eval::{MetricsReport, RocCurve, ScoredLabel};
pub use gestalt::{gestalt_ratio, GestaltScore, MatchBlock};
pub use ingest::{DatasetSummary, LabeledPair, PairFormat, ScoreRecord};
pub use method::{Method, UnknownMethod};
pub use normalize::{token_sort_normalize, CanonicalText, NormalizationConfig};
pub use vecsim::{EmbeddingVector, SimilarityScore};
